#pragma once

#include <stdexcept>

namespace ringdrive {

// Longitudinal command set. Accelerate/Brake use the nominal acceleration,
// HardBrake uses the hard one; Maintain coasts.
enum class LongitudinalAction { Maintain = 0, Accelerate = 1, Brake = 2, HardBrake = 3 };

// Lateral command set. Change* starts (or continues) a lane change; issuing
// the opposite Change* while a maneuver is in progress aborts it.
enum class LateralAction { Keep = 0, ChangeLeft = 1, ChangeRight = 2 };

struct Action {
  LongitudinalAction longitudinal = LongitudinalAction::Maintain;
  LateralAction lateral = LateralAction::Keep;

  bool operator==(const Action&) const = default;
};

inline constexpr int kNumLongitudinal = 4;
inline constexpr int kNumLateral = 3;
inline constexpr int kNumActions = kNumLongitudinal * kNumLateral;

// Flat action index: 3 * longitudinal + lateral, a bijection onto 0..11.
inline int action_index(Action a) {
  return kNumLateral * static_cast<int>(a.longitudinal) + static_cast<int>(a.lateral);
}

inline Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) throw std::out_of_range("action index out of range");
  return Action{static_cast<LongitudinalAction>(index / kNumLateral),
                static_cast<LateralAction>(index % kNumLateral)};
}

inline LateralAction opposite(LateralAction a) {
  if (a == LateralAction::ChangeLeft) return LateralAction::ChangeRight;
  if (a == LateralAction::ChangeRight) return LateralAction::ChangeLeft;
  return LateralAction::Keep;
}

const char* to_string(LongitudinalAction a);
const char* to_string(LateralAction a);

}  // namespace ringdrive
