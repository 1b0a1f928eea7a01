#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "optosync/io.hpp"

namespace optosync {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  if (key.find("..") != std::string_view::npos) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
  });
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  bool has_prefix(const std::string& prefix) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& kv) { return kv.first.rfind(prefix, 0) == 0; });
  }

  std::optional<std::string> text(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.push_back(key);
    return it->second.value;
  }

  std::optional<double> number(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    return parse_number(key, *t);
  }

  std::optional<bool> boolean(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    if (*t == "true") return true;
    if (*t == "false") return false;
    fail(ErrorCode::kSyntaxError, key, "expected true or false, got '" + *t + "'");
    return std::nullopt;
  }

  double parse_number(const std::string& key, std::string_view t) {
    double v = 0.0;
    t = trim(t);
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      fail(ErrorCode::kSyntaxError, key, "not a number: '" + std::string(t) + "'");
      return 0.0;
    }
    return v;
  }

  void fail(ErrorCode code, const std::string& key, const std::string& message) {
    auto it = entries_.find(key);
    const std::string where = it == entries_.end() ? "" : " (line " + std::to_string(it->second.line) + ")";
    violations.push_back({code, key, message + where});
  }

  void reject_unused() {
    for (const auto& [key, entry] : entries_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        violations.push_back({ErrorCode::kUnknownKey, key, "unrecognised key (line " + std::to_string(entry.line) + ")"});
      }
    }
  }

  std::vector<Violation> violations;

 private:
  std::map<std::string, Entry> entries_;
  std::vector<std::string> used_;
};

std::map<std::string, Entry> tokenize(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::vector<Violation> errors;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      errors.push_back({ErrorCode::kSyntaxError, where, "expected 'key = value'"});
    } else {
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (!valid_key(key)) {
        errors.push_back({ErrorCode::kSyntaxError, where, "malformed key '" + key + "'"});
      } else if (value.empty()) {
        errors.push_back({ErrorCode::kSyntaxError, where, "missing value for '" + key + "'"});
      } else if (!entries.emplace(key, Entry{value, line_no}).second) {
        errors.push_back({ErrorCode::kSyntaxError, where, "duplicate key '" + key + "'"});
      }
    }
    if (end == text.size()) break;
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return entries;
}

const char* const kPairNames[] = {"omega_m", "delta_c", "g1", "g2", "gamma_m", "kappa", "n_bar"};
const char* const kScalarNames[] = {"J", "E", "eta_D", "Omega_D"};

ParamRecord read_inline_params(Reader& r) {
  ParamRecord record;
  for (const char* name : kPairNames) {
    const std::string bare = std::string("params.") + name;
    const auto both = r.number(bare);
    for (int j = 1; j <= 2; ++j) {
      const std::string key = bare + "." + std::to_string(j);
      const auto one = r.number(key);
      if (one && both) r.fail(ErrorCode::kSyntaxError, key, "also set by '" + bare + "'");
      if (one) record[std::string(name) + "." + std::to_string(j)] = *one;
      else if (both) record[std::string(name) + "." + std::to_string(j)] = *both;
    }
  }
  for (const char* name : kScalarNames) {
    if (auto v = r.number(std::string("params.") + name)) record[name] = *v;
  }
  return record;
}

void read_integrator(Reader& r, IntegratorConfig& c) {
  if (auto mode = r.text("integrator.mode")) {
    if (*mode == "fixed") c.mode = StepMode::kFixed;
    else if (*mode == "adaptive") c.mode = StepMode::kAdaptive;
    else r.fail(ErrorCode::kSyntaxError, "integrator.mode", "expected fixed or adaptive");
  }
  if (auto layout = r.text("integrator.layout")) {
    if (*layout == "full") c.layout = CovarianceLayout::kFull;
    else if (*layout == "packed") c.layout = CovarianceLayout::kPacked;
    else r.fail(ErrorCode::kSyntaxError, "integrator.layout", "expected full or packed");
  }
  if (auto v = r.number("integrator.h0")) c.h0 = *v;
  if (auto v = r.number("integrator.rel_tol")) c.rel_tol = *v;
  if (auto v = r.number("integrator.abs_tol")) c.abs_tol = *v;
  if (auto v = r.number("integrator.t_end")) c.t_end = *v;
  if (auto v = r.number("integrator.sample_every")) c.sample_every = *v;
  if (auto v = r.boolean("integrator.physicality_guard")) c.physicality_guard = *v;
  if (auto v = r.number("integrator.physicality_floor")) c.physicality_floor = *v;
}

std::vector<double> parse_list(Reader& r, const std::string& key, const std::string& text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    values.push_back(r.parse_number(key, std::string_view(text).substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return values;
}

void read_sweep(Reader& r, std::optional<SweepSpec>& sweep) {
  const bool any = r.has_prefix("sweep.");
  if (!any) return;
  SweepSpec spec = sweep.value_or(SweepSpec{});
  if (auto axis = r.text("sweep.axis")) {
    spec.axis = *axis;
    if (!sweep || sweep->axis != *axis) spec.values.clear();
  }
  auto values = r.text("sweep.values");
  auto range = r.text("sweep.range");
  if (values && range) r.fail(ErrorCode::kConflictingSource, "sweep.range", "give sweep.values or sweep.range, not both");
  if (values) spec.values = parse_list(r, "sweep.values", *values);
  if (range) {
    const auto parts = std::count(range->begin(), range->end(), ':');
    std::string text = *range;
    std::replace(text.begin(), text.end(), ':', ',');
    const auto nums = parse_list(r, "sweep.range", text);
    if (parts != 2 || nums.size() != 3 || nums[2] < 1 || nums[2] != std::floor(nums[2])) {
      r.fail(ErrorCode::kSyntaxError, "sweep.range", "expected lo:hi:count");
    } else {
      spec.values = linspace(nums[0], nums[1], static_cast<std::size_t>(nums[2]));
    }
  }
  if (auto d = r.text("sweep.detuning")) {
    if (*d == "hold") spec.detuning = DetuningMode::kHold;
    else if (*d == "comove") spec.detuning = DetuningMode::kComove;
    else r.fail(ErrorCode::kSyntaxError, "sweep.detuning", "expected hold or comove");
  }
  if (spec.axis.empty()) {
    r.fail(ErrorCode::kMissingField, "sweep.axis", "required when sweep.* keys are given");
  } else if (!is_known_axis(spec.axis)) {
    r.fail(ErrorCode::kUnknownAxis, "sweep.axis", "unknown axis '" + spec.axis + "'");
  }
  if (spec.values.empty()) r.fail(ErrorCode::kMissingField, "sweep.values", "sweep needs at least one value");
  sweep = spec;
}

void read_oracle(Reader& r, OracleSettings& o) {
  if (auto v = r.number("oracle.horizon")) o.horizon = *v;
  if (auto v = r.number("oracle.ensemble")) {
    if (*v < 0 || *v != std::floor(*v)) r.fail(ErrorCode::kSyntaxError, "oracle.ensemble", "expected a count");
    else o.ensemble = static_cast<std::size_t>(*v);
  }
  if (auto t = r.text("oracle.seed")) {
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), seed);
    if (ec != std::errc() || ptr != t->data() + t->size()) {
      r.fail(ErrorCode::kSyntaxError, "oracle.seed", "expected an unsigned integer");
    } else {
      o.seed = seed;
    }
  }
  if (auto v = r.number("oracle.step")) o.step = *v;
  if (auto s = r.text("oracle.scheme")) {
    if (*s == "rk4") o.scheme = OracleScheme::kRk4Drift;
    else if (*s == "euler") o.scheme = OracleScheme::kEulerMaruyama;
    else r.fail(ErrorCode::kSyntaxError, "oracle.scheme", "expected rk4 or euler");
  }
}

void read_output(Reader& r, RunConfig& cfg) {
  if (auto d = r.text("output.dir")) cfg.output_dir = *d;
  if (auto v = r.boolean("output.trajectory")) cfg.emit_trajectory = *v;
  if (auto v = r.boolean("output.metrics")) cfg.emit_metrics = *v;
  if (auto v = r.boolean("output.sweep")) cfg.emit_sweep = *v;
}

}  // namespace

Preset RunConfig::as_preset() const {
  Preset p;
  if (uses_preset()) {
    p = find_preset(std::get<std::string>(source));
  } else {
    p.name = "inline";
    p.description = "parameters given inline";
  }
  p.params = params;
  p.integrator = integrator;
  p.sweep = sweep;
  return p;
}

RunConfig parse_config(std::string_view text) {
  Reader r(tokenize(text));
  RunConfig cfg;

  const bool has_preset = r.has("preset");
  const bool has_params = r.has_prefix("params.");
  if (has_preset && has_params) {
    throw ValidationError({{ErrorCode::kConflictingSource, "preset", "give either a preset or params.*, not both"}});
  }
  if (!has_preset && !has_params) {
    throw ValidationError({{ErrorCode::kMissingField, "preset", "a preset name or inline params.* is required"}});
  }

  if (has_preset) {
    const std::string name = *r.text("preset");
    const Preset* preset = nullptr;
    try {
      preset = &find_preset(name);
    } catch (const Error& e) {
      throw ValidationError({{ErrorCode::kUnknownPreset, "preset", e.what()}});
    }
    cfg.source = name;
    cfg.params = preset->params;
    cfg.integrator = preset->integrator;
    cfg.sweep = preset->sweep;
  } else {
    const ParamRecord record = read_inline_params(r);
    try {
      cfg.params = validate_params(record);
    } catch (const ValidationError& e) {
      r.violations.insert(r.violations.end(), e.violations().begin(), e.violations().end());
    }
    cfg.source = cfg.params;
  }

  read_integrator(r, cfg.integrator);
  read_sweep(r, cfg.sweep);
  read_oracle(r, cfg.oracle);
  read_output(r, cfg);
  r.reject_unused();

  auto violations = std::move(r.violations);
  try {
    check_config(cfg.integrator);
  } catch (const ValidationError& e) {
    violations.insert(violations.end(), e.violations().begin(), e.violations().end());
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));
  if (!cfg.uses_preset()) cfg.source = cfg.params;
  return cfg;
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto line = [&](const std::string& key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto num = [](double x) { return format_number(x); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };

  if (cfg.uses_preset()) {
    line("preset", std::get<std::string>(cfg.source));
  } else {
    const auto record = to_record(std::get<Params>(cfg.source));
    for (const auto& key : param_record_keys()) line("params." + key, num(record.at(key)));
  }

  const auto& c = cfg.integrator;
  line("integrator.mode", c.mode == StepMode::kFixed ? "fixed" : "adaptive");
  line("integrator.h0", num(c.h0));
  line("integrator.rel_tol", num(c.rel_tol));
  line("integrator.abs_tol", num(c.abs_tol));
  line("integrator.t_end", num(c.t_end));
  line("integrator.sample_every", num(c.sample_every));
  line("integrator.layout", c.layout == CovarianceLayout::kPacked ? "packed" : "full");
  line("integrator.physicality_guard", flag(c.physicality_guard));
  line("integrator.physicality_floor", num(c.physicality_floor));

  if (cfg.sweep) {
    line("sweep.axis", cfg.sweep->axis);
    std::string values;
    for (double v : cfg.sweep->values) values += (values.empty() ? "" : ",") + num(v);
    line("sweep.values", values);
    line("sweep.detuning", cfg.sweep->detuning == DetuningMode::kComove ? "comove" : "hold");
  }

  line("oracle.horizon", num(cfg.oracle.horizon));
  line("oracle.ensemble", std::to_string(cfg.oracle.ensemble));
  line("oracle.seed", std::to_string(cfg.oracle.seed));
  line("oracle.step", num(cfg.oracle.step));
  line("oracle.scheme", cfg.oracle.scheme == OracleScheme::kEulerMaruyama ? "euler" : "rk4");

  line("output.dir", cfg.output_dir);
  line("output.trajectory", flag(cfg.emit_trajectory));
  line("output.metrics", flag(cfg.emit_metrics));
  line("output.sweep", flag(cfg.emit_sweep));
  return os.str();
}

}  // namespace optosync
