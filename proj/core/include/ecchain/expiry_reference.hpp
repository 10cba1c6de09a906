// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/dual_trie_manager.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace ecchain::state
{
/// Brute-force interpreter of the expiry rules: plain sets, a full scan for
/// due timers, no index.
class ReferenceExpiry
{
public:
    ReferenceExpiry(uint64_t delta_T, uint64_t f_num, uint64_t f_den) : dT_{delta_T}, p_{f_num}, q_{f_den} {}

    struct Step
    {
        std::vector<state::Address> created, mined, expired;
    };

    Step step(const state::BlockAccess& b)
    {
        Step s;
        std::vector<state::Address> order = b.access;
        std::set<state::Address> creating;
        for (const auto& [a, v] : b.create)
        {
            creating.insert(a);
            if (std::find(b.access.begin(), b.access.end(), a) == b.access.end())
                order.push_back(a);
        }
        for (const auto& a : order)
        {
            if (!hot_.contains(a))
            {
                if (creating.contains(a) && !cold_.contains(a))
                {
                    creation_[a] = b.height;
                    s.created.push_back(a);
                }
                else if (cold_.contains(a))
                {
                    cold_.erase(a);
                    s.mined.push_back(a);
                }
                else
                {
                    throw Error{ErrorCode::unknown_state, "reference: unknown address"};
                }
                hot_.insert(a);
            }
            creating.erase(a);
            const uint64_t n = ++count_[a];
            const uint64_t freq = (n * q_) / p_ + ((n * q_) % p_ != 0 ? 1 : 0);
            timer_[a] = std::max(b.height + dT_, creation_[a] + freq);
        }
        for (auto it = hot_.begin(); it != hot_.end();)
        {
            if (timer_[*it] == b.height)
            {
                s.expired.push_back(*it);
                cold_.insert(*it);
                it = hot_.erase(it);
            }
            else
                ++it;
        }
        return s;
    }

    const std::set<state::Address>& hot() const { return hot_; }
    const std::set<state::Address>& cold() const { return cold_; }

private:
    uint64_t dT_, p_, q_;
    std::set<state::Address> hot_, cold_;
    std::map<state::Address, uint64_t> count_, creation_, timer_;
};
}  // namespace ecchain::state
