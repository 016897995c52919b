#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <stdexcept>

#include "blesim/power.hpp"

using namespace blesim;

TEST_CASE("average current interpolates between sleep and active") {
  PowerModel pm;  // 7.5 mA active, 0 mA sleep, 12000 mAh
  CHECK(average_current_ma(pm, 1.0) == 7.5);
  CHECK(average_current_ma(pm, 0.0) == 0.0);
  CHECK(average_current_ma(pm, 0.2) == doctest::Approx(1.5));
  PowerModel with_sleep{7.5, 0.5, 12000.0};
  CHECK(average_current_ma(with_sleep, 0.2) == doctest::Approx(1.9));
  CHECK_THROWS_AS(average_current_ma(pm, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(average_current_ma(pm, 1.1), std::invalid_argument);
}

TEST_CASE("battery life at reference duty cycles") {
  PowerModel pm;
  // 12000 mAh at 7.5 mA is 1600 h = 0.1826 years; quoted 0.18 is within 2%.
  CHECK(battery_life_years(pm, 1.0) == doctest::Approx(0.18).epsilon(0.02));
  CHECK(battery_life_years(pm, 0.2) == doctest::Approx(0.90).epsilon(0.02));
  CHECK(battery_life_years(pm, 0.1) == doctest::Approx(1.80).epsilon(0.02));
  CHECK(std::isinf(battery_life_years(pm, 0.0)));
}

TEST_CASE("battery life times average current recovers the capacity") {
  PowerModel pm{6.1, 0.3, 9000.0};
  for (double duty : {0.05, 0.2, 0.5, 1.0}) {
    const double years = battery_life_years(pm, duty);
    CHECK(years * kHoursPerYear * average_current_ma(pm, duty) ==
          doctest::Approx(pm.battery_capacity_mah));
  }
}

TEST_CASE("effective rate scales the baseline by the duty cycle") {
  CHECK(effective_rate(0.35, 1.0) == doctest::Approx(0.35));
  CHECK(effective_rate(0.35, 0.2) == doctest::Approx(0.07));
  CHECK(effective_rate(0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(effective_rate(1.2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(effective_rate(0.5, -0.1), std::invalid_argument);
}

TEST_CASE("rate extrapolation over the node period saturates at 1") {
  // A 35% baseline at a 1 s period reaches 87.5% at 2.5 s.
  CHECK(extrapolate_rate_for_period(0.35, 1.0) == doctest::Approx(0.35));
  CHECK(extrapolate_rate_for_period(0.35, 2.5) == doctest::Approx(0.875));
  CHECK(extrapolate_rate_for_period(0.35, 10.0) == 1.0);
  CHECK_THROWS_AS(extrapolate_rate_for_period(0.35, 0.0), std::invalid_argument);
}
