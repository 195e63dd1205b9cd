#include "rmued/alphabet.hpp"

#include <stdexcept>

namespace rmued {

namespace {

constexpr std::array<std::string_view, 4> kKindNames{"ball", "square", "key", "door"};
constexpr std::array<std::string_view, 7> kColorNames{"red",    "green", "blue",       "purple",
                                                      "yellow", "gray",  "unspecified"};
constexpr std::array<std::string_view, 4> kStateNames{"open", "closed", "locked", "unspecified"};
constexpr std::array<std::string_view, 3> kLocationNames{"front", "carrying", "next"};

// Sort keys with unspecified first.
int color_key(Color c) { return c == Color::unspecified ? 0 : static_cast<int>(c) + 1; }
int state_key(DoorState s) { return s == DoorState::unspecified ? 0 : static_cast<int>(s) + 1; }
Color color_from_key(int k) {
  return k == 0 ? Color::unspecified : static_cast<Color>(k - 1);
}
DoorState state_from_key(int k) {
  return k == 0 ? DoorState::unspecified : static_cast<DoorState>(k - 1);
}

bool attr_generalizes(Color general, Color specific) {
  return general == Color::unspecified || general == specific;
}
bool attr_generalizes(DoorState general, DoorState specific) {
  return general == DoorState::unspecified || general == specific;
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find('_', start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

// Parses a descriptor starting at tokens[pos]; advances pos.
std::optional<ObjectDescriptor> parse_descriptor(const std::vector<std::string_view>& tokens,
                                                 std::size_t& pos) {
  if (pos >= tokens.size()) return std::nullopt;
  auto kind = parse_kind(tokens[pos]);
  if (!kind) return std::nullopt;
  ObjectDescriptor d{*kind, Color::unspecified, DoorState::unspecified};
  ++pos;
  if (pos < tokens.size()) {
    if (auto c = parse_color(tokens[pos]); c && *c != Color::unspecified) {
      d.color = *c;
      ++pos;
    }
  }
  if (pos < tokens.size()) {
    if (auto s = parse_door_state(tokens[pos]); s && *s != DoorState::unspecified) {
      if (!d.is_door()) return std::nullopt;
      d.door_state = *s;
      ++pos;
    }
  }
  return d;
}

}  // namespace

std::string_view to_string(ObjectKind kind) { return kKindNames[static_cast<int>(kind)]; }
std::string_view to_string(Color color) { return kColorNames[static_cast<int>(color)]; }
std::string_view to_string(DoorState state) { return kStateNames[static_cast<int>(state)]; }
std::string_view to_string(Location location) {
  return kLocationNames[static_cast<int>(location)];
}

std::optional<ObjectKind> parse_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<ObjectKind>(i);
  return std::nullopt;
}
std::optional<Color> parse_color(std::string_view s) {
  for (std::size_t i = 0; i < kColorNames.size(); ++i)
    if (kColorNames[i] == s) return static_cast<Color>(i);
  return std::nullopt;
}
std::optional<DoorState> parse_door_state(std::string_view s) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i)
    if (kStateNames[i] == s) return static_cast<DoorState>(i);
  return std::nullopt;
}

bool ObjectDescriptor::concrete() const {
  if (color == Color::unspecified) return false;
  return is_door() ? door_state != DoorState::unspecified : door_state == DoorState::unspecified;
}

bool ObjectDescriptor::generalizes(const ObjectDescriptor& other) const {
  return kind == other.kind && attr_generalizes(color, other.color) &&
         attr_generalizes(door_state, other.door_state);
}

bool ObjectDescriptor::compatible_with(const ObjectDescriptor& other) const {
  if (kind != other.kind) return false;
  if (color != Color::unspecified && other.color != Color::unspecified && color != other.color)
    return false;
  if (door_state != DoorState::unspecified && other.door_state != DoorState::unspecified &&
      door_state != other.door_state)
    return false;
  return true;
}

int descriptor_index(const ObjectDescriptor& d) {
  if (!d.valid()) throw std::invalid_argument("descriptor_index: non-door with door state");
  if (!d.is_door()) return static_cast<int>(d.kind) * 7 + color_key(d.color);
  return kNumNonDoorDescriptors + color_key(d.color) * 4 + state_key(d.door_state);
}

ObjectDescriptor descriptor_at(int index) {
  if (index < 0 || index >= kNumDescriptors)
    throw std::out_of_range("descriptor_at: index out of range");
  if (index < kNumNonDoorDescriptors)
    return {static_cast<ObjectKind>(index / 7), color_from_key(index % 7),
            DoorState::unspecified};
  int rest = index - kNumNonDoorDescriptors;
  return {ObjectKind::door, color_from_key(rest / 4), state_from_key(rest % 4)};
}

std::string descriptor_name(const ObjectDescriptor& d) {
  std::string s(to_string(d.kind));
  if (d.color != Color::unspecified) {
    s += '_';
    s += to_string(d.color);
  }
  if (d.door_state != DoorState::unspecified) {
    s += '_';
    s += to_string(d.door_state);
  }
  return s;
}

std::string to_string(const Proposition& p) {
  std::string s(to_string(p.location));
  s += '_';
  s += descriptor_name(p.first);
  if (p.second) {
    s += '_';
    s += descriptor_name(*p.second);
  }
  return s;
}

std::optional<Proposition> parse_proposition(std::string_view s) {
  auto tokens = split(s);
  if (tokens.empty()) return std::nullopt;
  Proposition p;
  std::size_t pos = 1;
  if (tokens[0] == "front") {
    p.location = Location::front;
  } else if (tokens[0] == "carrying") {
    p.location = Location::carrying;
  } else if (tokens[0] == "next") {
    p.location = Location::next;
  } else {
    return std::nullopt;
  }
  auto first = parse_descriptor(tokens, pos);
  if (!first) return std::nullopt;
  p.first = *first;
  if (p.location == Location::next) {
    auto second = parse_descriptor(tokens, pos);
    if (!second) return std::nullopt;
    p.second = *second;
  }
  if (pos != tokens.size()) return std::nullopt;
  return p;
}

bool implies(const Proposition& p, const Proposition& q) {
  if (p.location != q.location) return false;
  if (p.location != Location::next) return q.first.generalizes(p.first);
  if (!p.second || !q.second) return false;
  return (q.first.generalizes(p.first) && q.second->generalizes(*p.second)) ||
         (q.first.generalizes(*p.second) && q.second->generalizes(p.first));
}

bool contradicts(const Proposition& p, const Proposition& q) {
  if (p.location != q.location || p.location == Location::next) return false;
  return !p.first.compatible_with(q.first);
}

std::vector<Proposition> enumerate_alphabet() {
  std::vector<Proposition> out;
  out.reserve(kAlphabetSize);
  for (int d = 0; d < kNumDescriptors; ++d)
    out.push_back({Location::front, descriptor_at(d), std::nullopt});
  for (int d = 0; d < kNumNonDoorDescriptors; ++d)
    out.push_back({Location::carrying, descriptor_at(d), std::nullopt});
  for (int a = 0; a < kNumDescriptors; ++a) {
    for (int b = a; b < kNumDescriptors; ++b) {
      ObjectDescriptor da = descriptor_at(a), db = descriptor_at(b);
      if (da.is_door() && db.is_door()) continue;
      out.push_back({Location::next, da, db});
    }
  }
  return out;
}

ConstraintMatrices build_matrices(std::span<const Proposition> alphabet) {
  const std::size_t n = alphabet.size();
  if (n != kAlphabetSize) throw std::invalid_argument("build_matrices: alphabet size mismatch");
  ConstraintMatrices m;
  m.constraint.assign(n, PropSet{}.set());
  m.compatibility.assign(n, PropSet{}.set());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (implies(alphabet[j], alphabet[i])) m.constraint[i].reset(j);
      if (contradicts(alphabet[j], alphabet[i])) m.compatibility[i].reset(j);
    }
  }
  return m;
}

std::array<std::uint8_t, 13> object_features(const ObjectDescriptor& d) {
  std::array<std::uint8_t, 13> f{};
  f[static_cast<std::size_t>(d.kind)] = 1;
  if (d.color != Color::unspecified) f[4 + static_cast<std::size_t>(d.color)] = 1;
  if (d.door_state != DoorState::unspecified) f[10 + static_cast<std::size_t>(d.door_state)] = 1;
  return f;
}

LiteralFeatures decompose_literal(const Literal& literal) {
  const Proposition& p = Alphabet::instance().at(literal.prop);
  LiteralFeatures f;
  f.location[static_cast<std::size_t>(p.location)] = 1;
  f.first = object_features(p.first);
  if (p.second) f.second = object_features(*p.second);
  f.sign = static_cast<int>(literal.sign);
  return f;
}

const Alphabet& Alphabet::instance() {
  static const Alphabet alphabet;
  return alphabet;
}

Alphabet::Alphabet() : props_(enumerate_alphabet()) {
  if (props_.size() != kAlphabetSize) throw std::logic_error("alphabet size mismatch");
  front_.fill(-1);
  carrying_.fill(-1);
  for (auto& row : next_) row.fill(-1);

  names_.reserve(props_.size());
  for (std::size_t i = 0; i < props_.size(); ++i) {
    const Proposition& p = props_[i];
    names_.push_back(to_string(p));
    int a = descriptor_index(p.first);
    switch (p.location) {
      case Location::front: front_[a] = static_cast<int>(i); break;
      case Location::carrying: carrying_[a] = static_cast<int>(i); break;
      case Location::next: {
        int b = descriptor_index(*p.second);
        next_[a][b] = static_cast<int>(i);
        next_[b][a] = static_cast<int>(i);
        break;
      }
    }
  }

  matrices_ = build_matrices(props_);
  const std::size_t n = props_.size();
  generalizations_.assign(n, PropSet{});
  specializations_.assign(n, PropSet{});
  contradictions_.assign(n, PropSet{});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // C[j][i] == 0  <=>  p_i implies p_j
      if (!matrices_.constraint[j][i]) {
        generalizations_[i].set(j);
        specializations_[j].set(i);
      }
      if (!matrices_.compatibility[i][j]) contradictions_[i].set(j);
    }
  }

  descriptor_generalizations_.resize(kNumDescriptors);
  for (int d = 0; d < kNumDescriptors; ++d) {
    ObjectDescriptor specific = descriptor_at(d);
    for (int g = 0; g < kNumDescriptors; ++g)
      if (descriptor_at(g).generalizes(specific)) descriptor_generalizations_[d].push_back(g);
  }
}

std::optional<PropId> Alphabet::find(const Proposition& p) const {
  if (!p.first.valid()) return std::nullopt;
  int a = descriptor_index(p.first);
  int idx = -1;
  switch (p.location) {
    case Location::front:
      if (p.second) return std::nullopt;
      idx = front_[a];
      break;
    case Location::carrying:
      if (p.second) return std::nullopt;
      idx = carrying_[a];
      break;
    case Location::next:
      if (!p.second || !p.second->valid()) return std::nullopt;
      idx = next_[a][descriptor_index(*p.second)];
      break;
  }
  if (idx < 0) return std::nullopt;
  return prop_id(static_cast<std::size_t>(idx));
}

std::optional<PropId> Alphabet::parse(std::string_view s) const {
  auto p = parse_proposition(s);
  if (!p) return std::nullopt;
  return find(*p);
}

PropId Alphabet::id(std::string_view s) const {
  auto p = parse(s);
  if (!p) throw std::invalid_argument("unknown proposition: " + std::string(s));
  return *p;
}

std::optional<PropId> Alphabet::front(int descriptor) const {
  int idx = front_.at(static_cast<std::size_t>(descriptor));
  if (idx < 0) return std::nullopt;
  return prop_id(static_cast<std::size_t>(idx));
}

std::optional<PropId> Alphabet::carrying(int descriptor) const {
  int idx = carrying_.at(static_cast<std::size_t>(descriptor));
  if (idx < 0) return std::nullopt;
  return prop_id(static_cast<std::size_t>(idx));
}

std::optional<PropId> Alphabet::next(int descriptor_a, int descriptor_b) const {
  int idx = next_.at(static_cast<std::size_t>(descriptor_a)).at(static_cast<std::size_t>(descriptor_b));
  if (idx < 0) return std::nullopt;
  return prop_id(static_cast<std::size_t>(idx));
}

PropSet Alphabet::close(const PropSet& label) const {
  PropSet out = label;
  for (std::size_t i = label._Find_first(); i < kAlphabetSize; i = label._Find_next(i))
    out |= generalizations_[i];
  return out;
}

}  // namespace rmued
