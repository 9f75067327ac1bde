#pragma once

#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "edgechain/bytes.hpp"
#include "edgechain/types.hpp"

namespace edgechain::rewards {

// Fixed-point reward units: 1 unit = 10^6 sub-units.
using Units = std::int64_t;
inline constexpr Units kUnit = 1'000'000;

inline std::string format_units(Units v) {
  const bool neg = v < 0;
  const auto a = neg ? -v : v;
  std::string frac = std::to_string(a % kUnit);
  frac.insert(0, 6 - frac.size(), '0');
  return (neg ? "-" : "") + std::to_string(a / kUnit) + "." + frac;
}

struct Account {
  DeviceId owner;
  Units balance = 0;
  Units endowment = 0;
  Units earned_as_bookkeeper = 0;
  Units earned_as_dividend = 0;
  Units earned_as_supporter = 0;
  Units paid_as_sender = 0;
};

struct Contribution {
  DeviceId infrastructure;
  Digest wallet{};
  std::uint64_t reliable_messages = 0;
};

struct Credit {
  Digest wallet{};
  Units amount = 0;
};

struct Distribution {
  Digest bookkeeper{};
  Units bookkeeper_share = 0;
  std::vector<Credit> dividends;  // same order as the contributions given
};

class RewardBook {
 public:
  explicit RewardBook(Units block_reward) : block_reward_(block_reward) {
    if (block_reward <= 0) throw Error(Errc::invalid_config, "rewards.block_reward must be > 0");
  }

  Units block_reward() const noexcept { return block_reward_; }

  void open_account(const Digest& wallet, const DeviceId& owner, Units endowment = 0) {
    if (endowment < 0) throw Error(Errc::invalid_config, "negative endowment");
    auto [it, inserted] = accounts_.try_emplace(wallet);
    if (!inserted) throw Error(Errc::duplicate_device, "wallet already open for " + it->second.owner);
    it->second.owner = owner;
    it->second.balance = endowment;
    it->second.endowment = endowment;
  }

  bool has_account(const Digest& wallet) const { return accounts_.contains(wallet); }
  const Account& account(const Digest& wallet) const { return get(wallet); }
  Units balance(const Digest& wallet) const { return get(wallet).balance; }
  const std::map<Digest, Account>& accounts() const noexcept { return accounts_; }
  std::uint64_t blocks_rewarded() const noexcept { return blocks_rewarded_; }

  Units total_balance() const {
    Units s = 0;
    for (const auto& [w, a] : accounts_) s += a.balance;
    return s;
  }
  Units total_endowment() const {
    Units s = 0;
    for (const auto& [w, a] : accounts_) s += a.endowment;
    return s;
  }

  // Computes the split without touching balances.
  Distribution plan_block_reward(const Digest& bookkeeper, std::span<const Contribution> contributions) const {
    get(bookkeeper);
    Distribution d;
    d.bookkeeper = bookkeeper;
    d.bookkeeper_share = block_reward_ / 2;
    const Units pool = block_reward_ - d.bookkeeper_share;

    std::uint64_t total = 0;
    for (const auto& c : contributions) {
      get(c.wallet);
      total += c.reliable_messages;
    }
    if (total == 0) {
      d.bookkeeper_share += pool;
      for (const auto& c : contributions) d.dividends.push_back({c.wallet, 0});
      return d;
    }
    Units handed_out = 0;
    std::size_t top = 0;
    for (std::size_t i = 0; i < contributions.size(); ++i) {
      const auto& c = contributions[i];
      const auto share = static_cast<Units>(static_cast<__int128>(pool) * c.reliable_messages / total);
      d.dividends.push_back({c.wallet, share});
      handed_out += share;
      const auto& t = contributions[top];
      if (c.reliable_messages > t.reliable_messages ||
          (c.reliable_messages == t.reliable_messages && c.infrastructure < t.infrastructure)) {
        top = i;
      }
    }
    d.dividends[top].amount += pool - handed_out;
    return d;
  }

  // Bookkeeper takes half of R; the other half goes to the community's
  // infrastructures in proportion to reliable messages. Division dust goes to
  // the largest contributor (ties to the lower device id); with no
  // contributions the bookkeeper keeps the whole reward.
  Distribution distribute_block_reward(const Digest& bookkeeper, std::span<const Contribution> contributions) {
    auto d = plan_block_reward(bookkeeper, contributions);
    auto& b = get(bookkeeper);
    b.balance += d.bookkeeper_share;
    b.earned_as_bookkeeper += d.bookkeeper_share;
    for (const auto& c : d.dividends) {
      auto& a = get(c.wallet);
      a.balance += c.amount;
      a.earned_as_dividend += c.amount;
    }
    ++blocks_rewarded_;
    return d;
  }

  // Transfers `fee` from the sender to every supporter; Σ balances unchanged.
  void pay_supporters(const Digest& sender, std::span<const Digest> supporters, Units fee) {
    if (fee < 0) throw Error(Errc::invalid_config, "negative supporter fee");
    auto& s = get(sender);
    for (const auto& w : supporters) get(w);
    const Units due = fee * static_cast<Units>(supporters.size());
    if (s.balance < due) {
      throw Error(Errc::insufficient_balance,
                  s.owner + " holds " + format_units(s.balance) + ", owes " + format_units(due));
    }
    s.balance -= due;
    s.paid_as_sender += due;
    for (const auto& w : supporters) {
      auto& a = get(w);
      a.balance += fee;
      a.earned_as_supporter += fee;
    }
  }

  // wallet, owner, balance, earned_as_bookkeeper, earned_as_dividend, earned_as_supporter
  void write_csv(std::ostream& os) const {
    os << "wallet,owner,balance,earned_as_bookkeeper,earned_as_dividend,earned_as_supporter\n";
    for (const auto& [w, a] : accounts_) {
      os << to_hex(w) << ',' << a.owner << ',' << format_units(a.balance) << ',' << format_units(a.earned_as_bookkeeper)
         << ',' << format_units(a.earned_as_dividend) << ',' << format_units(a.earned_as_supporter) << '\n';
    }
  }

 private:
  Account& get(const Digest& wallet) {
    auto it = accounts_.find(wallet);
    if (it == accounts_.end()) throw Error(Errc::unknown_account, to_hex(wallet));
    return it->second;
  }
  const Account& get(const Digest& wallet) const {
    auto it = accounts_.find(wallet);
    if (it == accounts_.end()) throw Error(Errc::unknown_account, to_hex(wallet));
    return it->second;
  }

  Units block_reward_;
  std::uint64_t blocks_rewarded_ = 0;
  std::map<Digest, Account> accounts_;
};

}  // namespace edgechain::rewards
