#include "optosync/model.hpp"

#include <algorithm>
#include <cmath>

namespace optosync {

namespace {

struct PairField {
  const char* name;
  std::array<double, 2> Params::*member;
};

struct ScalarField {
  const char* name;
  double Params::*member;
};

constexpr PairField kPairFields[] = {
    {"omega_m", &Params::omega_m}, {"delta_c", &Params::delta_c}, {"g1", &Params::g1},
    {"g2", &Params::g2},           {"gamma_m", &Params::gamma_m}, {"kappa", &Params::kappa},
    {"n_bar", &Params::n_bar},
};

constexpr ScalarField kScalarFields[] = {
    {"J", &Params::J}, {"E", &Params::E}, {"eta_D", &Params::eta_D}, {"Omega_D", &Params::Omega_D}};

std::string pair_key(const char* name, int j) { return std::string(name) + "." + std::to_string(j + 1); }

void collect_violations(const Params& p, std::vector<Violation>& out) {
  auto positive = [&](const char* name, const std::array<double, 2>& v) {
    for (int j = 0; j < 2; ++j) {
      if (std::isfinite(v[j]) && !(v[j] > 0.0)) {
        out.push_back({ErrorCode::kNonPositiveRate, pair_key(name, j), "must be > 0"});
      }
    }
  };
  positive("omega_m", p.omega_m);
  positive("gamma_m", p.gamma_m);
  positive("kappa", p.kappa);
  for (int j = 0; j < 2; ++j) {
    if (std::isfinite(p.n_bar[j]) && p.n_bar[j] < 0.0) {
      out.push_back({ErrorCode::kNegativeOccupation, pair_key("n_bar", j), "must be >= 0"});
    }
  }
  for (const auto& f : kPairFields) {
    for (int j = 0; j < 2; ++j) {
      if (!std::isfinite((p.*f.member)[j])) {
        out.push_back({ErrorCode::kNonFiniteParameter, pair_key(f.name, j), "must be finite"});
      }
    }
  }
  for (const auto& f : kScalarFields) {
    if (!std::isfinite(p.*f.member)) {
      out.push_back({ErrorCode::kNonFiniteParameter, f.name, "must be finite"});
    }
  }
}

}  // namespace

const std::vector<std::string>& param_record_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : kPairFields) {
      k.push_back(pair_key(f.name, 0));
      k.push_back(pair_key(f.name, 1));
    }
    for (const auto& f : kScalarFields) k.emplace_back(f.name);
    return k;
  }();
  return keys;
}

void check_params(const Params& params) {
  std::vector<Violation> violations;
  collect_violations(params, violations);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

Params validate_params(const ParamRecord& raw) {
  Params p;
  std::vector<Violation> violations;
  auto fetch = [&](const std::string& key, double& dst) {
    if (auto it = raw.find(key); it != raw.end()) {
      dst = it->second;
    } else {
      violations.push_back({ErrorCode::kMissingField, key, "required"});
      dst = 0.0;
    }
  };
  for (const auto& f : kPairFields) {
    fetch(pair_key(f.name, 0), (p.*f.member)[0]);
    fetch(pair_key(f.name, 1), (p.*f.member)[1]);
  }
  for (const auto& f : kScalarFields) fetch(f.name, p.*f.member);

  std::vector<Violation> range;
  collect_violations(p, range);
  // Zero placeholders for missing fields would otherwise show up twice.
  for (auto& v : range) {
    const bool missing = std::any_of(violations.begin(), violations.end(), [&](const Violation& m) {
      return m.code == ErrorCode::kMissingField && m.field == v.field;
    });
    if (!missing) violations.push_back(std::move(v));
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return p;
}

ParamRecord to_record(const Params& params) {
  ParamRecord r;
  for (const auto& f : kPairFields) {
    r[pair_key(f.name, 0)] = (params.*f.member)[0];
    r[pair_key(f.name, 1)] = (params.*f.member)[1];
  }
  for (const auto& f : kScalarFields) r[f.name] = params.*f.member;
  return r;
}

}  // namespace optosync
