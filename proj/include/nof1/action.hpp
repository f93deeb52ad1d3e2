#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nof1 {

/// One recommendable intervention. `duration_norm` is duration in minutes
/// divided by the longest duration in the owning set, so the longest
/// exercise of a set always has duration_norm == 1.
struct ExerciseAction {
  int type_id = 0;
  double intensity = 0.0;      // manually assigned, in [0, 1]
  double duration_norm = 0.0;  // in (0, 1]
  int duration_min = 0;
  std::string label;
};

/// Construction-time description of one action; duration normalization is
/// applied by ActionSet.
struct ActionDef {
  std::string label;
  int type_id = 0;
  double intensity = 0.0;
  int duration_min = 0;
};

/// Fixed, ordered set of candidate actions for one patient. All action
/// indices elsewhere in the library refer to this order. Normalization is
/// computed once at construction and never re-derived mid-trial.
class ActionSet {
 public:
  explicit ActionSet(const std::vector<ActionDef>& defs) {
    if (defs.empty()) throw std::invalid_argument("ActionSet: empty action list");
    int max_minutes = 0;
    std::vector<bool> type_seen;
    for (const auto& def : defs) {
      if (def.intensity < 0.0 || def.intensity > 1.0)
        throw std::invalid_argument("ActionSet: intensity outside [0, 1] for '" + def.label + "'");
      if (def.duration_min <= 0)
        throw std::invalid_argument("ActionSet: non-positive duration for '" + def.label + "'");
      if (def.type_id < 0)
        throw std::invalid_argument("ActionSet: negative type id for '" + def.label + "'");
      if (static_cast<std::size_t>(def.type_id) >= type_seen.size())
        type_seen.resize(def.type_id + 1, false);
      type_seen[def.type_id] = true;
      max_minutes = std::max(max_minutes, def.duration_min);
    }
    // type ids must form {0, ..., n_types-1}
    for (bool seen : type_seen)
      if (!seen) throw std::invalid_argument("ActionSet: type ids must be contiguous from 0");
    n_types_ = static_cast<int>(type_seen.size());
    actions_.reserve(defs.size());
    for (const auto& def : defs)
      actions_.push_back({def.type_id, def.intensity,
                          static_cast<double>(def.duration_min) / max_minutes,
                          def.duration_min, def.label});
  }

  std::size_t size() const { return actions_.size(); }
  int n_types() const { return n_types_; }
  const ExerciseAction& operator[](std::size_t i) const { return actions_.at(i); }
  const std::vector<ExerciseAction>& actions() const { return actions_; }
  auto begin() const { return actions_.begin(); }
  auto end() const { return actions_.end(); }

 private:
  std::vector<ExerciseAction> actions_;
  int n_types_ = 0;
};

/// The built-in eight-exercise set used by the simulation test bed: three
/// jogging intensities, three HIIT durations, swimming, and yoga.
inline ActionSet default_action_set() {
  return ActionSet({
      {"Slow jogging", 0, 0.3, 30},
      {"Jogging", 0, 0.5, 30},
      {"Fast jogging", 0, 0.7, 30},
      {"HIIT short", 1, 1.0, 6},
      {"HIIT medium", 1, 1.0, 12},
      {"HIIT long", 1, 1.0, 18},
      {"Swimming", 2, 0.5, 45},
      {"Yoga", 3, 0.1, 60},
  });
}

}  // namespace nof1
