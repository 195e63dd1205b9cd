#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rmued {

enum class ObjectKind : std::uint8_t { ball, square, key, door };
enum class Color : std::uint8_t { red, green, blue, purple, yellow, gray, unspecified };
enum class DoorState : std::uint8_t { open, closed, locked, unspecified };
enum class Location : std::uint8_t { front, carrying, next };

inline constexpr int kNumKinds = 4;
inline constexpr int kNumColors = 6;      // excluding unspecified
inline constexpr int kNumDoorStates = 3;  // excluding unspecified

std::string_view to_string(ObjectKind kind);
std::string_view to_string(Color color);
std::string_view to_string(DoorState state);
std::string_view to_string(Location location);
std::optional<ObjectKind> parse_kind(std::string_view s);
std::optional<Color> parse_color(std::string_view s);
std::optional<DoorState> parse_door_state(std::string_view s);

/// An object pattern. Unspecified attributes match anything.
struct ObjectDescriptor {
  ObjectKind kind = ObjectKind::ball;
  Color color = Color::unspecified;
  DoorState door_state = DoorState::unspecified;

  friend bool operator==(const ObjectDescriptor&, const ObjectDescriptor&) = default;

  bool is_door() const { return kind == ObjectKind::door; }
  bool valid() const { return is_door() || door_state == DoorState::unspecified; }
  /// Color set, and door state set iff door: describes a concrete grid object.
  bool concrete() const;
  /// True iff every attribute of *this is unspecified or equal to `other`'s.
  bool generalizes(const ObjectDescriptor& other) const;
  /// True iff some object can match both descriptors.
  bool compatible_with(const ObjectDescriptor& other) const;
};

inline constexpr int kNumNonDoorDescriptors = 21;
inline constexpr int kNumDoorDescriptors = 28;
inline constexpr int kNumDescriptors = kNumNonDoorDescriptors + kNumDoorDescriptors;

/// Position of a descriptor in the canonical descriptor order: by kind
/// (ball, square, key, door), then color, then door state, with unspecified
/// attributes sorting first.
int descriptor_index(const ObjectDescriptor& d);
ObjectDescriptor descriptor_at(int index);
/// e.g. "ball_blue", "door_green_locked", "key".
std::string descriptor_name(const ObjectDescriptor& d);

struct Proposition {
  Location location = Location::front;
  ObjectDescriptor first;
  std::optional<ObjectDescriptor> second;  // present iff location == next

  friend bool operator==(const Proposition&, const Proposition&) = default;
};

std::string to_string(const Proposition& p);
std::optional<Proposition> parse_proposition(std::string_view s);

/// Index of a proposition in the canonical alphabet.
enum class PropId : std::uint16_t {};
inline constexpr std::size_t to_index(PropId id) { return static_cast<std::size_t>(id); }
inline constexpr PropId prop_id(std::size_t index) { return static_cast<PropId>(index); }

inline constexpr std::size_t kAlphabetSize = 889;
using PropSet = std::bitset<kAlphabetSize>;

enum class Sign : std::int8_t { negative = -1, positive = 1 };

struct Literal {
  PropId prop{};
  Sign sign = Sign::positive;
  friend bool operator==(const Literal&, const Literal&) = default;
};

/// Binary decomposition of a literal used for policy-conditioning features.
struct LiteralFeatures {
  std::array<std::uint8_t, 3> location{};
  std::array<std::uint8_t, 13> first{};
  std::array<std::uint8_t, 13> second{};
  int sign = 1;
  friend bool operator==(const LiteralFeatures&, const LiteralFeatures&) = default;
};

std::array<std::uint8_t, 13> object_features(const ObjectDescriptor& d);

/// Reference semantics over proposition values. The Alphabet caches these.
bool implies(const Proposition& p, const Proposition& q);
bool contradicts(const Proposition& p, const Proposition& q);

/// All 889 propositions in canonical order: front block, carrying block,
/// next block, each sorted by canonical descriptor order.
std::vector<Proposition> enumerate_alphabet();

/// Constraint matrix C (C[i][j] = 0 iff p_j implies p_i) and compatibility
/// matrix K (K[i][j] = 0 iff p_i and p_j contradict). Row i is a bitset over j.
struct ConstraintMatrices {
  std::vector<PropSet> constraint;
  std::vector<PropSet> compatibility;
};
ConstraintMatrices build_matrices(std::span<const Proposition> alphabet);

/// The canonical alphabet with cached relations. Immutable; shared by all
/// threads.
class Alphabet {
 public:
  static const Alphabet& instance();

  std::size_t size() const { return props_.size(); }
  std::span<const Proposition> propositions() const { return props_; }
  const Proposition& at(PropId id) const { return props_.at(to_index(id)); }
  const std::string& name(PropId id) const { return names_.at(to_index(id)); }

  /// Accepts either orientation for next propositions.
  std::optional<PropId> find(const Proposition& p) const;
  std::optional<PropId> parse(std::string_view s) const;
  /// Throws std::invalid_argument when the name is not in the alphabet.
  PropId id(std::string_view s) const;

  std::optional<PropId> front(int descriptor) const;
  std::optional<PropId> carrying(int descriptor) const;
  std::optional<PropId> next(int descriptor_a, int descriptor_b) const;

  bool implies(PropId p, PropId q) const { return generalizations_[to_index(p)][to_index(q)]; }
  bool contradicts(PropId p, PropId q) const {
    return contradictions_[to_index(p)][to_index(q)];
  }
  /// {q : p implies q}
  const PropSet& generalizations(PropId p) const { return generalizations_[to_index(p)]; }
  /// {q : q implies p}
  const PropSet& specializations(PropId p) const { return specializations_[to_index(p)]; }
  const PropSet& contradictions(PropId p) const { return contradictions_[to_index(p)]; }

  /// Descriptor indices generalizing a concrete descriptor, the descriptor
  /// itself included.
  std::span<const int> descriptor_generalizations(int descriptor) const {
    return descriptor_generalizations_.at(static_cast<std::size_t>(descriptor));
  }

  const ConstraintMatrices& matrices() const { return matrices_; }

  /// Closes a label under implication.
  PropSet close(const PropSet& label) const;

 private:
  Alphabet();

  std::vector<Proposition> props_;
  std::vector<std::string> names_;
  std::array<int, kNumDescriptors> front_{};
  std::array<int, kNumDescriptors> carrying_{};
  std::array<std::array<int, kNumDescriptors>, kNumDescriptors> next_{};
  std::vector<PropSet> generalizations_;
  std::vector<PropSet> specializations_;
  std::vector<PropSet> contradictions_;
  std::vector<std::vector<int>> descriptor_generalizations_;
  ConstraintMatrices matrices_;
};

LiteralFeatures decompose_literal(const Literal& literal);

}  // namespace rmued
