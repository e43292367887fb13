// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "fadingmac/look.hpp"
#include "fadingmac/strategies.hpp"
#include "fadingmac/waterfill.hpp"

using namespace fadingmac;

TEST_CASE("look: K = L reduces to the pooled-budget capacity") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  for (int users : {1, 2, 4}) {
    const LookConfig cfg{users, users, law, 1.0};
    CHECK(look_capacity(cfg) ==
          doctest::Approx(c1(law, static_cast<double>(users))).epsilon(1e-9));
  }
  const FadingLaw two_atom = FadingLaw::discrete({{1.0, 0.5}, {4.0, 0.5}});
  CHECK(look_capacity({2, 2, two_atom, 0.5}) == doctest::Approx(c1(two_atom, 1.0)).epsilon(1e-9));
}

TEST_CASE("look: single active user banks the idle power") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const LookConfig cfg{2, 1, law, 1.0};
  CHECK(look_capacity(cfg) == doctest::Approx(c1(law, 2.0)).epsilon(1e-9));
}

TEST_CASE("look: unbounded growth in K at fixed L") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  double prev = 0.0;
  for (int users = 2; users <= 1024; users *= 2) {
    const double v = look_capacity({users, 2, law, 1.0});
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev > look_capacity({2, 2, law, 1.0}) + 2.0);  // grows by whole bits
}

TEST_CASE("look: monotone in the budget") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  CHECK(look_capacity({8, 2, law, 2.0}) > look_capacity({8, 2, law, 1.0}));
}

TEST_CASE("look: config validation") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  CHECK_THROWS_AS(look_capacity({2, 3, law, 1.0}), contract_error);
  CHECK_THROWS_AS(look_capacity({2, 0, law, 1.0}), contract_error);
  CHECK_THROWS_AS(look_capacity({2, 2, law, 0.0}), contract_error);
}

TEST_CASE("look strategy: active flags gate transmission") {
  const FadingLaw law = FadingLaw::rayleigh(1.0);
  const Strategy s = make_look_strategy({4, 2, law, 1.0});
  CHECK(s.active_per_block() == 2);
  CHECK(s.analytic_throughput() == doctest::Approx(look_capacity({4, 2, law, 1.0})).epsilon(1e-12));

  const std::vector<std::uint8_t> active = {1, 0, 1, 0};
  BlockContext ctx;
  ctx.active = active;
  CHECK(s.evaluate(0, 2.0, ctx).power > 0.0);
  CHECK(s.evaluate(1, 2.0, ctx).power == 0.0);
  CHECK_THROWS_AS(s.evaluate(0, 2.0, BlockContext{}), contract_error);
}
