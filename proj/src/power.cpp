#include "blesim/power.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace blesim {

double average_current_ma(const PowerModel& pm, double duty) {
  if (duty < 0.0 || duty > 1.0) {
    throw std::invalid_argument("average_current_ma: duty outside [0,1]");
  }
  return duty * pm.active_current_ma + (1.0 - duty) * pm.sleep_current_ma;
}

double battery_life_years(const PowerModel& pm, double duty) {
  const double current = average_current_ma(pm, duty);
  if (current <= 0.0) return std::numeric_limits<double>::infinity();
  return pm.battery_capacity_mah / current / kHoursPerYear;
}

double effective_rate(double baseline, double duty) {
  if (baseline < 0.0 || baseline > 1.0 || duty < 0.0 || duty > 1.0) {
    throw std::invalid_argument("effective_rate: arguments outside [0,1]");
  }
  return baseline * duty;
}

double extrapolate_rate_for_period(double baseline, double period_s) {
  if (period_s <= 0.0) {
    throw std::invalid_argument("extrapolate_rate_for_period: period must be > 0");
  }
  if (baseline < 0.0 || baseline > 1.0) {
    throw std::invalid_argument("extrapolate_rate_for_period: baseline outside [0,1]");
  }
  return std::min(1.0, baseline * period_s);
}

}  // namespace blesim
