#pragma once
// Delayed feedback scheduling. Feedback observed at the end of its delivery
// round; ties are delivered in origin order. Events still queued when the
// horizon ends are dropped (and counted by the caller via size()).

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "osp/numerics.hpp"
#include "osp/rng.hpp"

namespace osp {

enum class DelayKind { None, Fixed, Trace, UniformRandom };

struct DelayProfile {
  DelayKind kind = DelayKind::None;
  long fixed = 0;                // Fixed
  std::vector<long> trace;       // Trace: tau_t = trace[t-1]
  long tau_max = 0;              // UniformRandom: tau_t ~ Uniform{0..tau_max}
  std::uint64_t seed = 0;        // UniformRandom draw stream

  static DelayProfile none() { return {}; }
  static DelayProfile fixed_delay(long d) {
    if (d < 0) throw ConfigError("delay must be nonnegative");
    DelayProfile p;
    p.kind = DelayKind::Fixed;
    p.fixed = d;
    p.tau_max = d;
    return p;
  }
  static DelayProfile from_trace(std::vector<long> t) {
    DelayProfile p;
    p.kind = DelayKind::Trace;
    long mx = 0;
    for (long v : t) {
      if (v < 0) throw ConfigError("delay must be nonnegative");
      mx = std::max(mx, v);
    }
    p.trace = std::move(t);
    p.tau_max = mx;
    return p;
  }
  static DelayProfile uniform_random(long tau_max, std::uint64_t seed) {
    if (tau_max < 0) throw ConfigError("delay must be nonnegative");
    DelayProfile p;
    p.kind = DelayKind::UniformRandom;
    p.tau_max = tau_max;
    p.seed = seed;
    return p;
  }
};

// Draws (or reads) the delays for rounds 1..T, in round order.
class DelaySequence {
 public:
  DelaySequence(const DelayProfile& profile, long horizon)
      : profile_(profile), rng_(profile.seed) {
    taus_.reserve(horizon);
    for (long t = 1; t <= horizon; ++t) {
      switch (profile.kind) {
        case DelayKind::None:
          taus_.push_back(0);
          break;
        case DelayKind::Fixed:
          taus_.push_back(profile.fixed);
          break;
        case DelayKind::Trace:
          if (static_cast<size_t>(t - 1) >= profile.trace.size())
            throw ConfigError("delay trace shorter than horizon");
          taus_.push_back(profile.trace[t - 1]);
          break;
        case DelayKind::UniformRandom:
          taus_.push_back(static_cast<long>(
              rng_.next_below(static_cast<std::uint64_t>(profile.tau_max) + 1)));
          break;
      }
    }
  }

  long tau(long t) const { return taus_[t - 1]; }  // 1-based round
  const std::vector<long>& all() const { return taus_; }

 private:
  DelayProfile profile_;
  Rng rng_;
  std::vector<long> taus_;
};

template <typename Payload>
struct FeedbackEvent {
  long origin = 0;
  long deliver = 0;
  Payload payload;
};

template <typename Payload>
class DelayQueue {
 public:
  void push(long origin, long deliver, Payload payload) {
    if (deliver < origin) throw ProtocolError("delivery before origin");
    pending_[deliver].push_back({origin, deliver, std::move(payload)});
  }

  // All events due at or before round t, ties in origin order.
  std::vector<FeedbackEvent<Payload>> pop_due(long t) {
    std::vector<FeedbackEvent<Payload>> out;
    while (!pending_.empty() && pending_.begin()->first <= t) {
      auto& bucket = pending_.begin()->second;
      std::stable_sort(bucket.begin(), bucket.end(),
                       [](const auto& a, const auto& b) { return a.origin < b.origin; });
      for (auto& e : bucket) out.push_back(std::move(e));
      pending_.erase(pending_.begin());
    }
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [k, v] : pending_) n += v.size();
    return n;
  }

 private:
  std::map<long, std::vector<FeedbackEvent<Payload>>> pending_;
};

}  // namespace osp
