#include "adeuq/config.hpp"

#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "adeuq/error.hpp"

namespace adeuq {

using json = nlohmann::ordered_json;

namespace {

struct Field {
  std::string_view section;
  std::string_view key;
  std::function<void(PipelineConfig&, const json&)> set;
  std::function<json(const PipelineConfig&)> get;
};

std::string qualified(std::string_view section, std::string_view key) {
  return std::string(section) + "." + std::string(key);
}

double as_double(const json& value, std::string_view name) {
  if (!value.is_number())
    fail(ErrorKind::config, "config key '" + std::string(name) + "' expects a number, got " +
                                value.dump());
  return value.get<double>();
}

std::uint64_t as_unsigned(const json& value, std::string_view name) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  fail(ErrorKind::config, "config key '" + std::string(name) +
                              "' expects a non-negative integer, got " + value.dump());
}

template <typename T>
Field real_field(std::string_view section, std::string_view key, T PipelineConfig::*sec,
                 double T::*member) {
  return {section, key,
          [=](PipelineConfig& c, const json& v) { (c.*sec).*member = as_double(v, qualified(section, key)); },
          [=](const PipelineConfig& c) { return json((c.*sec).*member); }};
}

template <typename T, typename U>
Field count_field(std::string_view section, std::string_view key, T PipelineConfig::*sec,
                  U T::*member) {
  return {section, key,
          [=](PipelineConfig& c, const json& v) {
            (c.*sec).*member = static_cast<U>(as_unsigned(v, qualified(section, key)));
          },
          [=](const PipelineConfig& c) { return json((c.*sec).*member); }};
}

BoundaryKind parse_bc(const json& v) {
  if (v == "dirichlet-zero") return BoundaryKind::dirichlet_zero;
  if (v == "periodic") return BoundaryKind::periodic;
  fail(ErrorKind::config,
       "config key 'solver.bc' expects \"dirichlet-zero\" or \"periodic\", got " + v.dump());
}

InitialKind parse_ic(const json& v) {
  if (v == "sine") return InitialKind::sine;
  if (v == "gaussian-bump") return InitialKind::gaussian_bump;
  fail(ErrorKind::config,
       "config key 'solver.ic' expects \"sine\" or \"gaussian-bump\", got " + v.dump());
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using P = PipelineConfig;
    std::vector<Field> f;
    f.push_back(count_field("grid", "n_t", &P::grid, &GridSection::n_t));
    f.push_back(count_field("grid", "n_z", &P::grid, &GridSection::n_z));
    f.push_back(real_field("grid", "t_max", &P::grid, &GridSection::t_max));
    f.push_back(real_field("grid", "z_min", &P::grid, &GridSection::z_min));
    f.push_back(real_field("grid", "z_max", &P::grid, &GridSection::z_max));

    f.push_back(real_field("gp", "mu_Y", &P::gp, &GPConfig::mu_y));
    f.push_back(real_field("gp", "sigma_Y", &P::gp, &GPConfig::sigma_y));
    f.push_back(real_field("gp", "corr_len", &P::gp, &GPConfig::corr_len));
    f.push_back(real_field("gp", "p_exp", &P::gp, &GPConfig::p_exp));
    f.push_back(real_field("gp", "kappa_scale", &P::gp, &GPConfig::kappa_scale));

    f.push_back(real_field("solver", "w", &P::solver, &SolverSection::w));
    f.push_back({"solver", "bc",
                 [](P& c, const json& v) { c.solver.bc = parse_bc(v); },
                 [](const P& c) { return json(std::string(to_string(c.solver.bc))); }});
    f.push_back({"solver", "ic",
                 [](P& c, const json& v) { c.solver.ic = parse_ic(v); },
                 [](const P& c) { return json(std::string(to_string(c.solver.ic))); }});
    f.push_back(real_field("solver", "ic_center", &P::solver, &SolverSection::ic_center));
    f.push_back(real_field("solver", "ic_width", &P::solver, &SolverSection::ic_width));

    f.push_back(count_field("pce", "n_dim", &P::pce, &PCESection::n_dim));
    f.push_back(count_field("pce", "max_degree", &P::pce, &PCESection::max_degree));

    f.push_back(real_field("train", "lr", &P::train, &TrainSection::lr));
    f.push_back(real_field("train", "beta1", &P::train, &TrainSection::beta1));
    f.push_back(real_field("train", "beta2", &P::train, &TrainSection::beta2));
    f.push_back(real_field("train", "eps", &P::train, &TrainSection::eps));
    f.push_back(count_field("train", "epochs", &P::train, &TrainSection::epochs));
    f.push_back(count_field("train", "hidden_layers", &P::train, &TrainSection::hidden_layers));
    f.push_back(count_field("train", "hidden_units", &P::train, &TrainSection::hidden_units));

    f.push_back(count_field("run", "seed", &P::run, &RunSection::seed));
    f.push_back(count_field("run", "n_s", &P::run, &RunSection::n_s));
    f.push_back(count_field("run", "n_eval", &P::run, &RunSection::n_eval));
    f.push_back(count_field("run", "n_mc", &P::run, &RunSection::n_mc));
    f.push_back(count_field("run", "threads", &P::run, &RunSection::threads));
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& field : fields())
    if (field.section == section && field.key == key) return &field;
  return nullptr;
}

bool known_section(std::string_view section) {
  for (const auto& field : fields())
    if (field.section == section) return true;
  return false;
}

void set_field(PipelineConfig& config, std::string_view section, std::string_view key,
               const json& value) {
  if (!known_section(section))
    fail(ErrorKind::config, "unknown config section '" + std::string(section) + "'");
  const Field* field = find_field(section, key);
  if (!field) fail(ErrorKind::config, "unknown config key '" + qualified(section, key) + "'");
  field->set(config, value);
}

}  // namespace

std::string_view to_string(BoundaryKind bc) {
  return bc == BoundaryKind::periodic ? "periodic" : "dirichlet-zero";
}

std::string_view to_string(InitialKind ic) {
  return ic == InitialKind::gaussian_bump ? "gaussian-bump" : "sine";
}

PipelineConfig PipelineConfig::defaults() { return PipelineConfig{}; }

PipelineConfig PipelineConfig::paper() {
  PipelineConfig config;
  config.preset = "paper";
  config.grid.n_t = 128;
  config.grid.n_z = 64;
  config.run.n_s = 100;
  config.train.epochs = 15;
  config.train.lr = 1e-3;
  config.train.beta1 = 0.9;
  config.train.beta2 = 0.999;
  config.train.hidden_layers = 3;
  config.train.hidden_units = 128;
  config.pce.n_dim = 2;
  config.pce.max_degree = 1;
  return config;
}

PipelineConfig PipelineConfig::from_preset(std::string_view name) {
  if (name == "default") return defaults();
  if (name == "paper") return paper();
  fail(ErrorKind::config, "unknown preset '" + std::string(name) + "' (expected default or paper)");
}

PipelineConfig PipelineConfig::from_json_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::config, "config must be a JSON object");

  PipelineConfig config = defaults();
  if (auto it = doc.find("preset"); it != doc.end()) {
    if (!it->is_string()) fail(ErrorKind::config, "config key 'preset' expects a string");
    config = from_preset(it->get<std::string>());
  }
  for (const auto& [section, body] : doc.items()) {
    if (section == "preset") continue;
    if (!known_section(section))
      fail(ErrorKind::config, "unknown config section '" + section + "'");
    if (!body.is_object())
      fail(ErrorKind::config, "config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) set_field(config, section, key, value);
  }
  return config;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string PipelineConfig::to_json_text(int indent) const {
  json doc;
  doc["preset"] = preset;
  for (const auto& field : fields()) doc[std::string(field.section)][std::string(field.key)] = field.get(*this);
  return doc.dump(indent);
}

void PipelineConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    fail(ErrorKind::config, "override '" + std::string(assignment) + "' is not section.key=value");
  const std::string_view path = assignment.substr(0, eq);
  const auto dot = path.find('.');
  if (dot == std::string_view::npos)
    fail(ErrorKind::config, "override '" + std::string(assignment) + "' is not section.key=value");
  set(path.substr(0, dot), path.substr(dot + 1), assignment.substr(eq + 1));
}

void PipelineConfig::set(std::string_view section, std::string_view key, std::string_view value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  set_field(*this, section, key, parsed);
}

void PipelineConfig::validate() const {
  const SpatialGrid space = spatial_grid();
  (void)time_grid();
  gp.validate();
  solver_config().validate(space);
  require(pce.n_dim >= 1, "pce.n_dim must be >= 1");
  require(pce.n_dim <= grid.n_z, "pce.n_dim must not exceed grid.n_z");
  require(pce.max_degree <= 20, "pce.max_degree must be <= 20");
  architecture().validate();
  train_config().validate();
  require(run.n_s >= 1, "run.n_s must be >= 1");
  require(run.n_eval >= 1, "run.n_eval must be >= 1");
  require(run.n_mc >= 2, "run.n_mc must be >= 2");
  require(run.threads >= 1, "run.threads must be >= 1");
}

SolverConfig PipelineConfig::solver_config() const {
  SolverConfig cfg;
  cfg.w = solver.w;
  cfg.n_t = grid.n_t;
  cfg.t_max = grid.t_max;
  cfg.bc = solver.bc;
  cfg.ic.kind = solver.ic;
  cfg.ic.center = solver.ic_center;
  cfg.ic.width = solver.ic_width;
  return cfg;
}

MLPArchitecture PipelineConfig::architecture() const {
  MLPArchitecture arch;
  arch.in_dim = 2;
  arch.hidden_layers = train.hidden_layers;
  arch.hidden_units = train.hidden_units;
  arch.out_dim = binomial(pce.n_dim + pce.max_degree, pce.n_dim);
  return arch;
}

TrainConfig PipelineConfig::train_config() const {
  TrainConfig cfg;
  cfg.lr = train.lr;
  cfg.beta1 = train.beta1;
  cfg.beta2 = train.beta2;
  cfg.eps = train.eps;
  cfg.epochs = train.epochs;
  cfg.seed = run.seed;
  return cfg;
}

}  // namespace adeuq
