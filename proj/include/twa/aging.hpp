#pragma once

#include <map>
#include <string>
#include <vector>

#include "twa/logicsim.hpp"
#include "twa/timing.hpp"

namespace twa {

inline constexpr double kBoltzmannEvPerK = 8.617333262e-5;
inline constexpr double kSecondsPerYear = 365.0 * 24.0 * 3600.0;

struct AlphaPowerParams {
  double v_dd = 1.0;
  double v_th = 0.3;
  double mu = 1.0;
  double alpha = 1.3;
};

// v_dd / (mu * (v_dd - v_th)^alpha). Direction sanity only; the delay-shift
// model below works directly in the delay domain.
double alpha_power_delay(const AlphaPowerParams& p);

struct AgingParams {
  double A = 1.0;                  // fitting constant, ps per unit t^n * stress
  double Ea_eV = 0.5;              // activation energy; config default, cancels in ratios
  double T_K = 358.15;             // 85 C
  double n = 1.0 / 6.0;            // time exponent
  double beta_clamp_epsilon = 1e-3;
  double guardband_fraction = 0.10;

  double kappa() const;  // A * exp(-n * Ea / (k * T))
};

// (beta / (1 - beta))^n with beta clamped to [0, 1 - eps].
double stress_term(double beta, double n, double eps);

// Sum of stress terms over the path's traversed pins.
double path_stress_sum(const DutyProfile& profile, const TimingPath& path, double n, double eps);

struct PathDelta {
  std::vector<double> per_gate_ps;  // path step order
  double total_ps = 0.0;
};

// Delay shift at time t: per gate kappa * t^n * stress_term(beta of the
// traversed pin). Throws MissingBeta.
PathDelta delta_delay(const DutyProfile& profile, const TimingPath& path, const AgingParams& params,
                      double t_seconds);

struct AccelResult {
  double lifetime_ratio = 1.0;      // (stress_ref / stress_dut)^(1/n)
  double aging_acceleration = 1.0;  // reciprocal
  double stress_dut = 0.0;
  double stress_ref = 0.0;
  bool dut_zero_stress = false;     // lifetime_ratio +inf sentinel
  bool ref_zero_stress = false;
};

// Lifetime ratio between two duty profiles over their paths. Independent of
// A, Ea, T, and t. Zero-stress sides become infinity/zero sentinels; when
// both sides are unstressed the ratio is 1.
AccelResult acceleration_factor(const DutyProfile& dut_profile, const TimingPath& dut_path,
                                const DutyProfile& ref_profile, const TimingPath& ref_path,
                                double n, double beta_clamp_epsilon = 1e-3);

// Failure threshold: guardband_fraction * nominal path delay.
double failure_threshold_ps(const TimingPath& path, const AgingParams& params);

struct CalibrationRef {
  double beta_cal = 0.5;
  double lifetime_cal_seconds = 5.0 * kSecondsPerYear;
};

// A such that a uniform beta_cal profile on this path consumes the failure
// threshold exactly at the calibration lifetime. Throws DomainError.
double calibrate_fitting_constant(const TimingPath& path, const AgingParams& params,
                                  const CalibrationRef& ref);
double calibrate_fitting_constant_at_threshold(const TimingPath& path, const AgingParams& params,
                                               const CalibrationRef& ref, double threshold_ps);

// Closed-form inversion of the delay shift: t where the path delta reaches
// the threshold. Zero stress returns +infinity (never fails).
double time_to_failure(const DutyProfile& profile, const TimingPath& path, const AgingParams& params);
double time_to_failure_at_threshold(const DutyProfile& profile, const TimingPath& path,
                                    const AgingParams& params, double threshold_ps);

struct AgedDelays {
  std::map<std::string, Ps> delay_ps;  // gate id -> nominal + rounded delta
  double t_seconds = 0.0;
  AgingParams params;
  Ps ff_setup = 0;
  Ps ff_clk_to_q = 0;
  std::string beta_convention = "worst-pin";

  Ps gate_delay(const GateInstance& g) const;  // throws MissingDelay
};

// Whole-netlist aging under the worst-pin convention: each gate ages by the
// maximum beta among its input pins; pins missing from the profile count as
// beta 0.
AgedDelays age_delays(const Netlist& n, const DelayLibrary& lib, const DutyProfile& profile,
                      const AgingParams& params, double t_seconds);

}  // namespace twa
