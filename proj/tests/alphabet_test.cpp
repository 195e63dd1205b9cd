#include <chrono>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "rmued/rng.hpp"

using namespace rmued;
using fixtures::prop;

namespace {

// Descriptors enumerated straight from the attribute domains, independent of
// descriptor_at.
std::vector<ObjectDescriptor> brute_force_descriptors() {
  std::vector<ObjectDescriptor> out;
  for (int k = 0; k < kNumKinds; ++k) {
    for (int c = 0; c <= kNumColors; ++c) {
      for (int s = 0; s <= kNumDoorStates; ++s) {
        ObjectDescriptor d{static_cast<ObjectKind>(k), static_cast<Color>(c),
                           static_cast<DoorState>(s)};
        if (d.valid()) out.push_back(d);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("alphabet size and block counts match an independent count") {
  auto t0 = std::chrono::steady_clock::now();
  auto alphabet = enumerate_alphabet();
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(seconds < 1.0);

  auto descriptors = brute_force_descriptors();
  long non_doors = 0;
  long doors = 0;
  for (const auto& d : descriptors) (d.is_door() ? doors : non_doors)++;
  REQUIRE(non_doors == 21);
  REQUIRE(doors == 28);
  const long front = non_doors + doors;
  const long carrying = non_doors;
  const long next = non_doors * (non_doors - 1) / 2 + non_doors + non_doors * doors;

  long f = 0, c = 0, n = 0;
  for (const auto& p : alphabet) {
    if (p.location == Location::front) ++f;
    if (p.location == Location::carrying) ++c;
    if (p.location == Location::next) ++n;
  }
  CHECK(f == front);
  CHECK(c == carrying);
  CHECK(n == next);
  CHECK(alphabet.size() == 889);
  CHECK(Alphabet::instance().size() == 889);
}

TEST_CASE("alphabet members respect the structural rules") {
  auto alphabet = enumerate_alphabet();
  std::set<std::string> names;
  std::set<std::pair<int, int>> pairs;
  for (const auto& p : alphabet) {
    names.insert(to_string(p));
    CHECK(p.first.valid());
    if (p.location == Location::carrying) CHECK_FALSE(p.first.is_door());
    if (p.location == Location::next) {
      REQUIRE(p.second);
      CHECK_FALSE((p.first.is_door() && p.second->is_door()));
      int a = descriptor_index(p.first);
      int b = descriptor_index(*p.second);
      CHECK(pairs.insert({std::min(a, b), std::max(a, b)}).second);
    } else {
      CHECK_FALSE(p.second);
    }
  }
  CHECK(names.size() == alphabet.size());
  CHECK(names.count("front_ball") == 1);
  // Exactly one orientation of each symmetric pair.
  const auto& a = Alphabet::instance();
  CHECK(a.parse("next_square_key").has_value());
  CHECK(a.parse("next_key_square").has_value());
  CHECK(*a.parse("next_square_key") == *a.parse("next_key_square"));
}

TEST_CASE("names round-trip through the parser") {
  const auto& a = Alphabet::instance();
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto parsed = a.parse(a.name(prop_id(i)));
    REQUIRE(parsed);
    CHECK(to_index(*parsed) == i);
  }
}

TEST_CASE("implication examples") {
  auto p = [](const char* s) { return *parse_proposition(s); };
  CHECK(implies(p("front_ball_blue"), p("front_ball")));
  CHECK_FALSE(implies(p("front_ball"), p("front_ball_blue")));
  CHECK(implies(p("next_square_purple_key_green"), p("next_square_key")));
  CHECK(implies(p("next_key_green_square_purple"), p("next_square_key")));
  CHECK_FALSE(implies(p("carrying_ball"), p("front_ball")));
}

TEST_CASE("contradiction examples") {
  auto p = [](const char* s) { return *parse_proposition(s); };
  CHECK(contradicts(p("front_ball_blue"), p("front_key")));
  CHECK_FALSE(contradicts(p("front_ball_blue"), p("front_ball")));
  CHECK_FALSE(contradicts(p("next_ball_key"), p("carrying_ball")));
}

TEST_CASE("implication is reflexive and transitive on the front block") {
  const auto& a = Alphabet::instance();
  std::vector<PropId> front;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.at(prop_id(i)).location == Location::front) front.push_back(prop_id(i));
  REQUIRE(front.size() == 49);
  for (PropId x : front) {
    CHECK(a.implies(x, x));
    for (PropId y : front)
      for (PropId z : front)
        if (a.implies(x, y) && a.implies(y, z)) CHECK(a.implies(x, z));
  }
}

TEST_CASE("contradicting pairs never imply each other and K is symmetric") {
  const auto& a = Alphabet::instance();
  const auto& m = a.matrices();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(m.compatibility[i][i]);
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (m.compatibility[i][j] != m.compatibility[j][i]) FAIL("K is not symmetric");
      if (a.contradicts(prop_id(i), prop_id(j)) &&
          (a.implies(prop_id(i), prop_id(j)) || a.implies(prop_id(j), prop_id(i))))
        FAIL("contradicting pair with an implication");
    }
  }
}

TEST_CASE("constraint matrix agrees with implication on random pairs") {
  const auto& a = Alphabet::instance();
  auto alphabet = enumerate_alphabet();
  auto m = build_matrices(alphabet);
  Rng rng(11);
  for (int k = 0; k < 1000; ++k) {
    auto i = static_cast<std::size_t>(rng.uniform_index(a.size()));
    auto j = static_cast<std::size_t>(rng.uniform_index(a.size()));
    CHECK(!m.constraint[i][j] == implies(alphabet[j], alphabet[i]));
  }
}

TEST_CASE("literal decomposition") {
  const auto& a = Alphabet::instance();
  SUBCASE("positive next with a door") {
    auto f = decompose_literal({prop("next_key_purple_door_locked"), Sign::positive});
    CHECK(f.location == std::array<std::uint8_t, 3>{0, 0, 1});
    CHECK(f.sign == 1);
    ObjectDescriptor key{ObjectKind::key, Color::purple, DoorState::unspecified};
    ObjectDescriptor door{ObjectKind::door, Color::unspecified, DoorState::locked};
    CHECK(f.first == object_features(key));
    CHECK(f.second == object_features(door));
  }
  SUBCASE("negative front") {
    auto f = decompose_literal({prop("front_ball"), Sign::negative});
    CHECK(f.sign == -1);
    CHECK(f.location == std::array<std::uint8_t, 3>{1, 0, 0});
    int set_bits = 0;
    for (auto b : f.first) set_bits += b;
    CHECK(set_bits == 1);
    for (auto b : f.second) CHECK(b == 0);
  }
  SUBCASE("injective over signed members") {
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (Sign s : {Sign::positive, Sign::negative}) {
        auto f = decompose_literal({prop_id(i), s});
        std::vector<int> key(f.location.begin(), f.location.end());
        key.insert(key.end(), f.first.begin(), f.first.end());
        key.insert(key.end(), f.second.begin(), f.second.end());
        key.push_back(f.sign);
        CHECK(seen.insert(key).second);
      }
    }
  }
}
