#include "twa/aging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twa {

double alpha_power_delay(const AlphaPowerParams& p) {
  if (p.v_dd <= p.v_th) {
    throw Error(ErrorCode::DomainError, "V_dd must exceed V_th");
  }
  if (p.v_th <= 0.0 || p.mu <= 0.0) {
    throw Error(ErrorCode::DomainError, "V_th and mu must be positive");
  }
  return p.v_dd / (p.mu * std::pow(p.v_dd - p.v_th, p.alpha));
}

double AgingParams::kappa() const {
  return A * std::exp(-n * Ea_eV / (kBoltzmannEvPerK * T_K));
}

double stress_term(double beta, double n, double eps) {
  if (beta < 0.0 || beta > 1.0) {
    throw Error(ErrorCode::InvalidFraction, "beta " + std::to_string(beta));
  }
  double b = std::min(beta, 1.0 - eps);
  if (b <= 0.0) return 0.0;
  return std::pow(b / (1.0 - b), n);
}

double path_stress_sum(const DutyProfile& profile, const TimingPath& path, double n, double eps) {
  double sum = 0.0;
  for (const auto& step : path.steps) {
    sum += stress_term(profile.beta_at(step.gate_id, step.input_pin), n, eps);
  }
  return sum;
}

PathDelta delta_delay(const DutyProfile& profile, const TimingPath& path, const AgingParams& params,
                      double t_seconds) {
  if (t_seconds < 0.0) throw Error(ErrorCode::DomainError, "negative time");
  PathDelta delta;
  const double scale = params.kappa() * std::pow(t_seconds, params.n);
  for (const auto& step : path.steps) {
    double beta = profile.beta_at(step.gate_id, step.input_pin);
    double d = scale * stress_term(beta, params.n, params.beta_clamp_epsilon);
    delta.per_gate_ps.push_back(d);
    delta.total_ps += d;
  }
  return delta;
}

AccelResult acceleration_factor(const DutyProfile& dut_profile, const TimingPath& dut_path,
                                const DutyProfile& ref_profile, const TimingPath& ref_path,
                                double n, double beta_clamp_epsilon) {
  if (n <= 0.0 || n >= 1.0) throw Error(ErrorCode::DomainError, "exponent n must lie in (0,1)");
  AccelResult r;
  r.stress_dut = path_stress_sum(dut_profile, dut_path, n, beta_clamp_epsilon);
  r.stress_ref = path_stress_sum(ref_profile, ref_path, n, beta_clamp_epsilon);
  r.dut_zero_stress = r.stress_dut == 0.0;
  r.ref_zero_stress = r.stress_ref == 0.0;
  if (r.dut_zero_stress && r.ref_zero_stress) {
    r.lifetime_ratio = 1.0;
    r.aging_acceleration = 1.0;
  } else if (r.dut_zero_stress) {
    r.lifetime_ratio = std::numeric_limits<double>::infinity();
    r.aging_acceleration = 0.0;
  } else if (r.ref_zero_stress) {
    r.lifetime_ratio = 0.0;
    r.aging_acceleration = std::numeric_limits<double>::infinity();
  } else {
    r.lifetime_ratio = std::pow(r.stress_ref / r.stress_dut, 1.0 / n);
    r.aging_acceleration = std::pow(r.stress_dut / r.stress_ref, 1.0 / n);
  }
  return r;
}

double failure_threshold_ps(const TimingPath& path, const AgingParams& params) {
  return params.guardband_fraction * static_cast<double>(path.nominal_delay);
}

double calibrate_fitting_constant_at_threshold(const TimingPath& path, const AgingParams& params,
                                               const CalibrationRef& ref, double threshold_ps) {
  if (ref.beta_cal <= 0.0 || ref.beta_cal >= 1.0) {
    throw Error(ErrorCode::DomainError, "calibration beta must lie in (0,1)");
  }
  if (ref.lifetime_cal_seconds <= 0.0) {
    throw Error(ErrorCode::DomainError, "calibration lifetime must be positive");
  }
  if (path.steps.empty()) {
    throw Error(ErrorCode::DomainError, "cannot calibrate on an empty path");
  }
  if (threshold_ps <= 0.0) {
    throw Error(ErrorCode::DomainError, "calibration threshold must be positive");
  }
  double sum = static_cast<double>(path.steps.size()) *
               stress_term(ref.beta_cal, params.n, params.beta_clamp_epsilon);
  if (sum == 0.0) throw Error(ErrorCode::DomainError, "calibration stress sum is zero");
  double boltz = std::exp(params.n * params.Ea_eV / (kBoltzmannEvPerK * params.T_K));
  return threshold_ps * boltz / (std::pow(ref.lifetime_cal_seconds, params.n) * sum);
}

double calibrate_fitting_constant(const TimingPath& path, const AgingParams& params,
                                  const CalibrationRef& ref) {
  return calibrate_fitting_constant_at_threshold(path, params, ref,
                                                 failure_threshold_ps(path, params));
}

double time_to_failure_at_threshold(const DutyProfile& profile, const TimingPath& path,
                                    const AgingParams& params, double threshold_ps) {
  if (threshold_ps < 0.0) throw Error(ErrorCode::DomainError, "negative threshold");
  double sum = path_stress_sum(profile, path, params.n, params.beta_clamp_epsilon);
  if (sum == 0.0) return std::numeric_limits<double>::infinity();  // never fails
  return std::pow(threshold_ps / (params.kappa() * sum), 1.0 / params.n);
}

double time_to_failure(const DutyProfile& profile, const TimingPath& path, const AgingParams& params) {
  return time_to_failure_at_threshold(profile, path, params, failure_threshold_ps(path, params));
}

Ps AgedDelays::gate_delay(const GateInstance& g) const {
  auto it = delay_ps.find(g.id);
  if (it == delay_ps.end()) throw Error(ErrorCode::MissingDelay, "aged delay for gate " + g.id);
  return it->second;
}

AgedDelays age_delays(const Netlist& n, const DelayLibrary& lib, const DutyProfile& profile,
                      const AgingParams& params, double t_seconds) {
  AgedDelays aged;
  aged.t_seconds = t_seconds;
  aged.params = params;
  aged.ff_setup = lib.ff_setup;
  aged.ff_clk_to_q = lib.ff_clk_to_q;
  const double scale = params.kappa() * std::pow(t_seconds, params.n);
  for (const auto& g : n.gates) {
    double worst_beta = 0.0;
    for (int p = 0; p < input_count(g.kind); ++p) {
      if (profile.has(g.id, p)) worst_beta = std::max(worst_beta, profile.beta_at(g.id, p));
    }
    double d = scale * stress_term(worst_beta, params.n, params.beta_clamp_epsilon);
    aged.delay_ps[g.id] = lib.gate_delay(g) + static_cast<Ps>(std::llround(d));
  }
  return aged;
}

}  // namespace twa
