#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "edgechain/error.hpp"
#include "edgechain/types.hpp"

namespace edgechain::trust {

struct TrustRecord {
  std::uint64_t legal = 0;
  std::uint64_t illegal = 0;
  // Every message attempted, including those still under processing.
  std::uint64_t total = 0;
  double quality = 1.0;

  bool operator==(const TrustRecord&) const = default;
};

struct TrustParams {
  double alpha = 0.5;
  double beta = 0.5;
  double gamma = 0.5;
  double delta = 0.5;
  double credit_threshold = 0.25;

  void validate() const {
    auto check = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(Errc::invalid_config, std::string("trust.") + name + " must be a finite value >= 0");
      }
    };
    check(alpha, "alpha");
    check(beta, "beta");
    check(gamma, "gamma");
    check(delta, "delta");
    if (!std::isfinite(credit_threshold)) {
      throw Error(Errc::invalid_config, "trust.credit_threshold must be finite");
    }
  }
};

enum class Outcome { legal, illegal };

inline TrustRecord record_outcome(TrustRecord rec, Outcome outcome) {
  (outcome == Outcome::legal ? rec.legal : rec.illegal) += 1;
  rec.total += 1;
  return rec;
}

// Two-phase form of record_outcome: the attempt is counted when the message
// is composed, the verdict once it is terminal.
inline TrustRecord record_attempt(TrustRecord rec) {
  rec.total += 1;
  return rec;
}

inline TrustRecord resolve_attempt(TrustRecord rec, Outcome outcome) {
  if (rec.legal + rec.illegal >= rec.total) {
    throw Error(Errc::invariant_violation, "resolve_attempt without an outstanding attempt");
  }
  (outcome == Outcome::legal ? rec.legal : rec.illegal) += 1;
  return rec;
}

// T = (alpha*l - beta*h) / total, and 0 for a participant with no history.
inline double trust_of(const TrustRecord& rec, const TrustParams& p) {
  if (rec.total == 0) return 0.0;
  return (p.alpha * static_cast<double>(rec.legal) - p.beta * static_cast<double>(rec.illegal)) /
         static_cast<double>(rec.total);
}

inline double credit_infrastructure(const TrustRecord& rec, const TrustParams& p) {
  return p.gamma * trust_of(rec, p) + p.delta * rec.quality;
}

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

inline double credit_edge_node(const TrustRecord& rec, const TrustParams& p) {
  return logistic(trust_of(rec, p));
}

// Share of accepted messages among terminal ones; 1.0 with no terminal history.
inline double quality_of(std::span<const Status> history) {
  std::uint64_t ok = 0;
  std::uint64_t terminal = 0;
  for (auto s : history) {
    if (s == Status::processing) continue;
    ++terminal;
    if (s == Status::accepted) ++ok;
  }
  return terminal == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(terminal);
}

// Table-style seeding on a 10-message scale: u legal, 10-u illegal.
inline TrustRecord seeded_record(std::uint64_t level, std::uint64_t scale = 10) {
  if (level > scale) throw Error(Errc::invalid_config, "trust level exceeds scale");
  return TrustRecord{level, scale - level, scale, 1.0};
}

struct TrustRow {
  DeviceId participant_id;
  Role role;
  TrustRecord record;
  double trust;
  double credit;
};

// Per-participant counters plus terminal-status history (for quality).
// Owned by the simulation driver; all mutation goes through here.
class TrustLedger {
 public:
  explicit TrustLedger(TrustParams params = {}) : params_(params) {}

  // `quality_prior` accepted statuses pre-seed the quality history, so one
  // early failure does not drive q to 0.
  void init(const DeviceId& id, Role role, TrustRecord initial = {}, std::uint32_t quality_prior = 0) {
    Entry e{role, initial, std::vector<Status>(quality_prior, Status::accepted)};
    if (quality_prior > 0) e.record.quality = quality_of(e.history);
    entries_.insert_or_assign(id, std::move(e));
  }

  bool contains(const DeviceId& id) const { return entries_.contains(id); }
  const TrustRecord& record(const DeviceId& id) const { return entry(id).record; }
  Role role(const DeviceId& id) const { return entry(id).role; }
  const TrustParams& params() const noexcept { return params_; }

  void record_attempt(const DeviceId& id) { auto& e = entry(id); e.record = trust::record_attempt(e.record); }
  void resolve_attempt(const DeviceId& id, Outcome o) { auto& e = entry(id); e.record = trust::resolve_attempt(e.record, o); }
  void record_outcome(const DeviceId& id, Outcome o) { auto& e = entry(id); e.record = trust::record_outcome(e.record, o); }

  void record_status(const DeviceId& id, Status s) {
    auto& e = entry(id);
    e.history.push_back(s);
    e.record.quality = quality_of(e.history);
  }

  double trust(const DeviceId& id) const { return trust_of(record(id), params_); }

  // Eq. 5 for infrastructures, the logistic credit for edge nodes.
  double credit(const DeviceId& id) const {
    const auto& e = entry(id);
    return e.role == Role::edge_node ? credit_edge_node(e.record, params_) : credit_infrastructure(e.record, params_);
  }

  std::vector<TrustRow> rows() const {
    std::vector<TrustRow> out;
    out.reserve(entries_.size());
    for (const auto& [id, e] : entries_) out.push_back({id, e.role, e.record, trust(id), credit(id)});
    return out;
  }

  static void write_csv(std::ostream& os, const std::vector<TrustRow>& rows) {
    os << "participant_id,role,l,h,total,q,trust,credit\n";
    for (const auto& r : rows) {
      os << r.participant_id << ',' << role_name(r.role) << ',' << r.record.legal << ',' << r.record.illegal << ','
         << r.record.total << ',' << r.record.quality << ',' << r.trust << ',' << r.credit << '\n';
    }
  }

 private:
  struct Entry {
    Role role;
    TrustRecord record;
    std::vector<Status> history;
  };

  Entry& entry(const DeviceId& id) {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw Error(Errc::unregistered_party, id);
    return it->second;
  }
  const Entry& entry(const DeviceId& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw Error(Errc::unregistered_party, id);
    return it->second;
  }

  TrustParams params_;
  std::map<DeviceId, Entry> entries_;
};

}  // namespace edgechain::trust
