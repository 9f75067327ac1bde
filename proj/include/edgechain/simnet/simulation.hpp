#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "edgechain/consensus/election.hpp"
#include "edgechain/consensus/puzzle.hpp"
#include "edgechain/ledger/chain.hpp"
#include "edgechain/messaging.hpp"
#include "edgechain/rewards.hpp"
#include "edgechain/simnet/topology.hpp"

namespace edgechain::simnet {

struct EpochMetrics {
  std::uint64_t height = 0;
  std::uint64_t illegal_sent = 0;
  std::uint64_t illegal_intercepted = 0;
  std::uint64_t legal_sent = 0;
  std::uint64_t legal_delivered = 0;
  double interception_rate = 0.0;
};

struct SimMetrics {
  std::uint64_t illegal_sent = 0;
  std::uint64_t illegal_intercepted = 0;
  std::uint64_t legal_sent = 0;
  std::uint64_t legal_delivered = 0;
  std::uint64_t illegal_delivered = 0;
  std::uint64_t rejected_at_screening = 0;  // all messages stopped by the credit screen
  std::uint64_t unfunded = 0;               // expired because fees could never be paid
  double interception_rate = 0.0;
  std::vector<EpochMetrics> epochs;
  std::uint64_t chain_height = 0;
};

// Labels used in MessageLogRow::intercepted_by for non-supporter stops.
inline constexpr std::string_view kStopScreening = "screening";
inline constexpr std::string_view kStopNoSupporters = "insufficient-supporters";
inline constexpr std::string_view kStopUnfunded = "unfunded";
inline constexpr std::string_view kStopCentral = "central";

// Every illegal message that ended in -1 counts as intercepted, whichever
// stage stopped it.
inline SimMetrics compute_metrics(std::span<const messaging::MessageLogRow> log, std::uint64_t chain_height) {
  SimMetrics m;
  m.chain_height = chain_height;
  std::map<std::uint64_t, EpochMetrics> by_height;
  for (const auto& row : log) {
    if (!is_terminal(row.status)) throw Error(Errc::non_terminal_messages, to_hex(row.msg_id));
    auto& e = by_height[row.height];
    e.height = row.height;
    const bool stopped = row.status == Status::failed;
    if (row.is_illegal) {
      ++m.illegal_sent;
      ++e.illegal_sent;
      if (stopped) {
        ++m.illegal_intercepted;
        ++e.illegal_intercepted;
      } else {
        ++m.illegal_delivered;
      }
    } else {
      ++m.legal_sent;
      ++e.legal_sent;
      if (!stopped) {
        ++m.legal_delivered;
        ++e.legal_delivered;
      }
    }
    if (stopped && row.intercepted_by == kStopScreening) ++m.rejected_at_screening;
    if (stopped && row.intercepted_by == kStopUnfunded) ++m.unfunded;
  }
  auto rate = [](std::uint64_t hit, std::uint64_t sent) {
    return sent == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(sent);
  };
  m.interception_rate = rate(m.illegal_intercepted, m.illegal_sent);
  for (auto& [h, e] : by_height) {
    e.interception_rate = rate(e.illegal_intercepted, e.illegal_sent);
    m.epochs.push_back(e);
  }
  return m;
}

struct SimResult {
  SimMetrics metrics;
  ledger::Chain chain;
  rewards::RewardBook book;
  trust::TrustLedger trust;
  std::vector<messaging::MessageLogRow> log;
  identity::Registry registry;
};

// One message of generated traffic. Drawn from its own stream so the
// proposed scheme and the baseline see identical traffic for a seed.
struct TrafficItem {
  std::uint32_t sender = 0;
  std::uint32_t receiver = 0;
  bool is_illegal = false;
};

class TrafficGenerator {
 public:
  TrafficGenerator(std::uint64_t seed, std::uint32_t n_infrastructures, double attack_rate)
      : rng_(RngStream::derive(seed, "traffic")), n_(n_infrastructures), attack_rate_(attack_rate) {}

  TrafficItem next() {
    TrafficItem t;
    t.sender = static_cast<std::uint32_t>(rng_.uniform_below(n_));
    t.receiver = static_cast<std::uint32_t>(rng_.uniform_below(n_ - 1));
    if (t.receiver >= t.sender) ++t.receiver;
    t.is_illegal = rng_.bernoulli(attack_rate_);
    return t;
  }

 private:
  RngStream rng_;
  std::uint32_t n_;
  double attack_rate_;
};

// Reward transaction body: height, bookkeeper, its share, then each dividend.
inline Bytes encode_reward(std::uint64_t height, const DeviceId& bookkeeper, const rewards::Distribution& d,
                           std::span<const rewards::Contribution> contributions) {
  ByteWriter w;
  w.u64(height).str(bookkeeper).raw(d.bookkeeper).u64(static_cast<std::uint64_t>(d.bookkeeper_share));
  w.u32(static_cast<std::uint32_t>(d.dividends.size()));
  for (std::size_t i = 0; i < d.dividends.size(); ++i) {
    w.str(contributions[i].infrastructure).raw(d.dividends[i].wallet).u64(contributions[i].reliable_messages);
    w.u64(static_cast<std::uint64_t>(d.dividends[i].amount));
  }
  return std::move(w).take();
}

inline Bytes encode_registration(const identity::Certificate& cert) {
  ByteWriter w;
  w.raw(cert.payload()).raw(cert.signature.bytes);
  return std::move(w).take();
}

namespace detail {

class Driver {
 public:
  explicit Driver(const SimConfig& cfg)
      : cfg_(cfg),
        policy_(cfg.policy()),
        net_(generate_topology(cfg)),
        chain_(cfg.puzzle.params),
        book_(cfg.rewards.block_reward),
        traffic_(cfg.seed, cfg.n_infrastructures, cfg.attack_rate),
        endorse_rng_(RngStream::derive(cfg.seed, "endorse")),
        race_rng_(RngStream::derive(cfg.seed, "race")),
        seal_rng_(RngStream::derive(cfg.seed, "seal")) {
    policy_.validate();
    for (const auto& id : net_.infrastructures) {
      const auto& b = net_.bundle(id);
      book_.open_account(b.wallet_address, id, cfg.rewards.initial_endowment);
    }
    for (const auto& id : net_.edge_nodes) book_.open_account(net_.bundle(id).wallet_address, id, 0);
    for (const auto& [id, entry] : net_.registry.entries()) {
      registrations_.push_back({ledger::TxKind::registration, encode_registration(entry.certificate), 0});
    }
  }

  SimResult run() {
    for (std::uint64_t tick = 0; tick < cfg_.n_messages; ++tick) {
      if (tick % cfg_.epoch_length == 0) retry_pending(tick);
      const auto t = traffic_.next();
      submit(t, tick);
      if ((tick + 1) % cfg_.epoch_length == 0) close_epoch(tick);
    }
    if (cfg_.n_messages % cfg_.epoch_length != 0) close_epoch(cfg_.n_messages - 1);
    drain();
    check_invariants();

    auto metrics = compute_metrics(log_, chain_.height());
    return SimResult{std::move(metrics), std::move(chain_), std::move(book_), std::move(net_.trust), std::move(log_),
                     std::move(net_.registry)};
  }

 private:
  struct InFlight {
    messaging::Message msg;
    messaging::MessageLogRow row;
  };

  std::uint64_t next_height() const { return chain_.height() + 1; }

  void submit(const TrafficItem& t, std::uint64_t tick) {
    const auto& sender = net_.bundle(net_.infrastructures[t.sender]);
    const auto& receiver = net_.bundle(net_.infrastructures[t.receiver]);
    const std::string text = "msg " + std::to_string(tick) + " " + sender.device_id + "->" + receiver.device_id;
    InFlight f{messaging::compose_message(to_bytes(text), sender, receiver.public_key, net_.registry), {}};
    f.msg.is_illegal = t.is_illegal;
    f.row.msg_id = f.msg.msg_id;
    f.row.sender = sender.device_id;
    f.row.receiver = receiver.device_id;
    f.row.p = cfg_.supporters;
    f.row.is_illegal = t.is_illegal;
    f.row.tick = tick;
    net_.trust.record_attempt(sender.device_id);
    process(std::move(f), tick);
  }

  // compose -> screen -> endorse -> route. Unfunded messages stay at status
  // 0 and wait in the pending queue.
  void process(InFlight f, std::uint64_t tick) {
    const auto& sender = net_.bundle(f.row.sender);
    if (messaging::screen_sender(f.msg, net_.registry, net_.trust, cfg_.trust) == messaging::ScreenResult::reject) {
      finish(std::move(f), std::string(kStopScreening));
      return;
    }
    const auto due = policy_.supporter_fee * static_cast<rewards::Units>(policy_.required_supporters);
    if (book_.balance(sender.wallet_address) < due) {
      pending_.push_back(std::move(f));
      return;
    }

    const auto candidates = supporter_candidates(f.row.sender);
    messaging::EndorsementResult res;
    try {
      res = messaging::gather_endorsements(f.msg, policy_, candidates, cfg_.trust.credit_threshold, endorse_rng_);
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_supporters) throw;
      f.msg.set_status(Status::failed);
      finish(std::move(f), std::string(kStopNoSupporters));
      return;
    }
    if (!res.endorsed) {
      net_.trust.resolve_attempt(f.row.sender, trust::Outcome::illegal);
      finish(std::move(f), *res.flagged_by);
      return;
    }

    std::vector<Digest> wallets;
    for (const auto& s : res.supporters) wallets.push_back(net_.bundle(s).wallet_address);
    book_.pay_supporters(sender.wallet_address, wallets, policy_.supporter_fee);
    auto delivery = messaging::route_to_receiver(f.msg, net_.registry, policy_.required_supporters, tick);
    epoch_txs_.push_back({ledger::TxKind::delivery, delivery.encode(), tick});
    epoch_contrib_[f.row.sender] += 1;
    finish(std::move(f), {});
  }

  void finish(InFlight f, std::string stopped_by) {
    auto& row = f.row;
    row.status = f.msg.status();
    row.intercepted_by = std::move(stopped_by);
    row.height = next_height();
    // Quality tracks verdicts on messages the edge node accepted for
    // endorsement; a credit-screen rejection (possibly caused by the
    // receiver) is not a verdict on the sender's task.
    if (row.intercepted_by != kStopScreening) net_.trust.record_status(row.sender, row.status);
    // The sender's edge node screened correctly iff illegal traffic was
    // stopped and legal traffic went through.
    const bool correct = row.is_illegal == (row.status == Status::failed);
    const auto& edge = net_.communities[net_.community_of.at(row.sender)].edge_node;
    net_.trust.record_outcome(edge, correct ? trust::Outcome::legal : trust::Outcome::illegal);
    log_.push_back(std::move(row));
  }

  // Tiers: linked neighbours, rest of own community, then other communities
  // in ring order.
  std::vector<messaging::SupporterCandidate> supporter_candidates(const DeviceId& sender) const {
    std::vector<messaging::SupporterCandidate> out;
    out.reserve(net_.infrastructures.size());
    const auto home = net_.community_of.at(sender);
    const auto n = static_cast<CommunityId>(net_.communities.size());
    for (CommunityId k = 0; k < n; ++k) {
      const auto& community = net_.communities[(home + k) % n];
      for (const auto& id : community.members) {
        if (id == sender) continue;
        std::uint32_t tier = k + 1;
        if (k == 0) tier = net_.linked(sender, id) ? 0 : 1;
        out.push_back({&net_.bundle(id), net_.trust.credit(id), tier});
      }
    }
    return out;
  }

  void retry_pending(std::uint64_t tick) {
    std::deque<InFlight> waiting;
    waiting.swap(pending_);
    while (!waiting.empty()) {
      auto f = std::move(waiting.front());
      waiting.pop_front();
      process(std::move(f), tick);
    }
  }

  // Credit-weighted vote: each edge node backs the most credible other edge
  // node. The top-K by weighted votes (filled by credit rank) race the puzzle.
  std::vector<consensus::RaceEntrant> elect_candidates() const {
    std::vector<DeviceId> by_credit = net_.edge_nodes;
    std::stable_sort(by_credit.begin(), by_credit.end(), [&](const auto& a, const auto& b) {
      return net_.trust.credit(a) > net_.trust.credit(b);
    });
    consensus::Election election;
    election.voters = net_.edge_nodes;
    for (const auto& voter : net_.edge_nodes) {
      election.weights[voter] = net_.trust.credit(voter);
      for (const auto& c : by_credit) {
        if (c != voter) {
          election.ballots[voter] = c;
          break;
        }
      }
    }
    std::vector<DeviceId> chosen;
    if (!election.ballots.empty()) {
      for (const auto& t : consensus::tally(election)) chosen.push_back(t.candidate);
    }
    for (const auto& c : by_credit) {
      if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
    }
    chosen.resize(std::min<std::size_t>(chosen.size(), cfg_.puzzle.candidates));
    std::vector<consensus::RaceEntrant> entrants;
    for (const auto& id : chosen) entrants.push_back({id, net_.hash_rate.at(id)});
    return entrants;
  }

  std::vector<rewards::Contribution> contributions() const {
    std::vector<rewards::Contribution> out;
    for (const auto& [id, count] : epoch_contrib_) out.push_back({id, net_.bundle(id).wallet_address, count});
    return out;
  }

  ledger::Block build_block(const DeviceId& bookkeeper, const std::vector<rewards::Contribution>& contrib,
                            const U256& target, std::uint64_t timestamp, std::uint64_t tick) const {
    std::vector<ledger::Transaction> txs;
    if (chain_.height() == 0) txs = registrations_;
    txs.insert(txs.end(), epoch_txs_.begin(), epoch_txs_.end());
    const auto plan = book_.plan_block_reward(net_.bundle(bookkeeper).wallet_address, contrib);
    const auto reward_tick = std::max(tick, txs.empty() ? std::uint64_t{0} : txs.back().timestamp);
    txs.push_back({ledger::TxKind::reward, encode_reward(next_height(), bookkeeper, plan, contrib), reward_tick});
    return ledger::assemble_block(std::move(txs), chain_.tip_header(), target, timestamp);
  }

  void close_epoch(std::uint64_t tick) {
    const auto target = chain_.expected_target(chain_.tip());
    const auto parent_ts = chain_.tip_header().timestamp;
    const auto entrants = elect_candidates();
    const auto contrib = contributions();

    consensus::RaceOutcome race;
    if (cfg_.puzzle.mode == PuzzleMode::fast) {
      race = consensus::race_fast(entrants, target, race_rng_);
    } else {
      std::vector<ledger::BlockHeader> provisional;
      for (const auto& e : entrants) provisional.push_back(build_block(e.id, contrib, target, parent_ts + 1, tick).header);
      race = consensus::race_real(entrants, provisional, cfg_.puzzle.params, race_rng_);
    }
    const auto& bookkeeper = entrants[race.winner].id;

    auto block = build_block(bookkeeper, contrib, target, parent_ts + race.elapsed_ticks, tick);
    for (;;) {
      try {
        block.header = consensus::solve_puzzle(block.header, cfg_.puzzle.params, seal_rng_).header;
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::nonce_exhausted) throw;
        block.header.timestamp += 1;  // fresh header, new search space
      }
    }
    chain_.append_block(std::move(block));

    book_.distribute_block_reward(net_.bundle(bookkeeper).wallet_address, contrib);
    for (const auto& [id, count] : epoch_contrib_) {
      for (std::uint64_t i = 0; i < count; ++i) net_.trust.resolve_attempt(id, trust::Outcome::legal);
    }
    epoch_txs_.clear();
    epoch_contrib_.clear();
  }

  // After traffic ends, keep closing epochs while unfunded messages make
  // progress; whatever is still stuck then expires.
  void drain() {
    std::uint64_t tick = cfg_.n_messages;
    while (!pending_.empty()) {
      const auto before = pending_.size();
      retry_pending(tick);
      close_epoch(tick);
      if (pending_.size() == before) break;
      ++tick;
    }
    for (auto& f : pending_) {
      f.msg.set_status(Status::failed);
      finish(std::move(f), std::string(kStopUnfunded));
    }
    pending_.clear();
  }

  void check_invariants() const {
    const auto expected = book_.total_endowment() +
                          static_cast<rewards::Units>(book_.blocks_rewarded()) * book_.block_reward();
    if (book_.total_balance() != expected || book_.blocks_rewarded() != chain_.height()) {
      throw Error(Errc::invariant_violation, "reward conservation");
    }
    std::set<Digest> on_chain;
    for (const auto* b : chain_.canonical()) {
      for (const auto& tx : b->transactions) {
        if (tx.kind != ledger::TxKind::delivery) continue;
        auto d = messaging::DeliveryRecord::decode(tx.payload);
        if (!on_chain.insert(d.msg_id).second) throw Error(Errc::invariant_violation, "message delivered twice");
      }
    }
    std::size_t delivered = 0;
    for (const auto& row : log_) {
      if (row.status == Status::accepted) {
        ++delivered;
        if (!on_chain.contains(row.msg_id)) throw Error(Errc::invariant_violation, "delivered message missing from chain");
      }
    }
    if (delivered != on_chain.size()) throw Error(Errc::invariant_violation, "chain holds unlogged deliveries");
  }

  SimConfig cfg_;
  messaging::EndorsementPolicy policy_;
  Network net_;
  ledger::Chain chain_;
  rewards::RewardBook book_;
  TrafficGenerator traffic_;
  RngStream endorse_rng_;
  RngStream race_rng_;
  RngStream seal_rng_;
  std::vector<ledger::Transaction> registrations_;
  std::vector<ledger::Transaction> epoch_txs_;
  std::map<DeviceId, std::uint64_t> epoch_contrib_;
  std::deque<InFlight> pending_;
  std::vector<messaging::MessageLogRow> log_;
};

}  // namespace detail

inline SimResult run_simulation(const SimConfig& cfg) { return detail::Driver(cfg).run(); }

// d_c = 1 - (1 - d)^ceil(p/2): one central check worth half the supporters.
inline double baseline_detection_prob(std::uint32_t p, double d) {
  return 1.0 - std::pow(1.0 - d, static_cast<double>((p + 1) / 2));
}

// Centralized scheme on the same traffic: no supporters, no chain.
inline SimMetrics run_baseline(const SimConfig& cfg) {
  cfg.validate();
  TrafficGenerator traffic(cfg.seed, cfg.n_infrastructures, cfg.attack_rate);
  auto detect = RngStream::derive(cfg.seed, "baseline");
  const double dc = baseline_detection_prob(cfg.supporters, cfg.detection_prob);
  std::vector<messaging::MessageLogRow> log;
  log.reserve(cfg.n_messages);
  for (std::uint64_t tick = 0; tick < cfg.n_messages; ++tick) {
    const auto t = traffic.next();
    messaging::MessageLogRow row;
    row.sender = infrastructure_name(t.sender, cfg.n_infrastructures);
    row.receiver = infrastructure_name(t.receiver, cfg.n_infrastructures);
    row.msg_id = crypto::sha256(to_bytes("msg " + std::to_string(tick) + " " + row.sender + "->" + row.receiver));
    row.p = cfg.supporters;
    row.is_illegal = t.is_illegal;
    row.tick = tick;
    row.height = tick / cfg.epoch_length + 1;
    const bool flagged = detect.uniform01() < (t.is_illegal ? dc : cfg.false_flag_prob);
    row.status = flagged ? Status::failed : Status::accepted;
    if (flagged) row.intercepted_by = std::string(kStopCentral);
    log.push_back(std::move(row));
  }
  return compute_metrics(log, 0);
}

}  // namespace edgechain::simnet
