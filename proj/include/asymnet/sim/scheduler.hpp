#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "asymnet/core/time.hpp"

namespace asymnet::sim {

// Event priorities at equal times: completions first, then node work, then
// transmitter sampling.
enum class Priority : int { Delivery = 0, Node = 1, Sample = 2, Transport = 3 };

// Single-threaded discrete-event scheduler. Ties are broken by (priority, key,
// insertion order), so runs are reproducible.
class Scheduler {
 public:
  using Action = std::function<void()>;

  void schedule(Time t, Priority p, std::uint64_t key, Action a) {
    if (t < now_) t = now_;
    q_.push(Entry{t, static_cast<int>(p), key, seq_++, std::move(a)});
  }

  Time now() const { return now_; }
  bool empty() const { return q_.empty(); }
  std::size_t pending() const { return q_.size(); }
  std::uint64_t executed() const { return executed_; }
  std::optional<Time> next_time() const {
    if (q_.empty()) return std::nullopt;
    return q_.top().t;
  }

  // Runs events with time <= t_end; `after_each` is called after every event.
  template <class F>
  void run_until(Time t_end, F&& after_each) {
    while (!q_.empty() && q_.top().t <= t_end) {
      auto e = q_.top();
      q_.pop();
      now_ = e.t;
      e.action();
      ++executed_;
      after_each();
    }
    if (now_ < t_end) now_ = t_end;
  }
  void run_until(Time t_end) {
    run_until(t_end, [] {});
  }

 private:
  struct Entry {
    Time t;
    int prio;
    std::uint64_t key;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.t != b.t) return a.t > b.t;
      if (a.prio != b.prio) return a.prio > b.prio;
      if (a.key != b.key) return a.key > b.key;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> q_;
  Time now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t executed_ = 0;
};

}  // namespace asymnet::sim
