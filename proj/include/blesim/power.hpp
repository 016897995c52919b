#pragma once

namespace blesim {

// Duty-cycle power arithmetic for the relay: average current, battery
// lifetime, and the duty-scaled forwarding efficiency.
struct PowerModel {
  double active_current_ma = 7.5;
  double sleep_current_ma = 0.0;
  double battery_capacity_mah = 12000.0;
};

inline constexpr double kHoursPerYear = 8760.0;

// duty * active + (1 - duty) * sleep, in mA. duty must be in [0, 1].
double average_current_ma(const PowerModel& pm, double duty);

// capacity / average current, hours converted to years. Returns +inf when
// the average current is zero.
double battery_life_years(const PowerModel& pm, double duty);

// Best-case forwarded fraction at a given duty cycle: baseline * duty.
double effective_rate(double baseline, double duty);

// Same forwarded throughput offered fewer packets: min(1, baseline * period),
// with the baseline measured at a 1 s node transmission period.
double extrapolate_rate_for_period(double baseline, double period_s);

}  // namespace blesim
