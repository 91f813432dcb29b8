#include "lagan/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace lagan {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("config: bad value '" + std::string(value) + "' for " + std::string(key) +
                    " (expected " + expected + ")");
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

template <class E>
struct EnumName {
  E value;
  const char* name;
};

template <class E, std::size_t N>
E parse_enum(std::string_view key, std::string_view v, const EnumName<E> (&table)[N],
             const char* expected) {
  for (const auto& e : table)
    if (v == e.name) return e.value;
  bad_value(key, v, expected);
}

template <class E, std::size_t N>
const char* enum_name(E value, const EnumName<E> (&table)[N]) {
  for (const auto& e : table)
    if (e.value == value) return e.name;
  return "?";
}

constexpr EnumName<Dataset> kDatasets[] = {{Dataset::gauss1d_shift, "gauss1d_shift"},
                                           {Dataset::modes2d_rot, "modes2d_rot"},
                                           {Dataset::finite, "finite"}};
constexpr EnumName<objectives::LossForm> kForms[] = {{objectives::LossForm::log, "log"},
                                                     {objectives::LossForm::hinge, "hinge"}};
constexpr EnumName<objectives::GenLoss> kGenLosses[] = {
    {objectives::GenLoss::minimax, "minimax"},
    {objectives::GenLoss::non_saturating, "non_saturating"}};
constexpr EnumName<MmdSpace> kMmdSpaces[] = {{MmdSpace::raw, "raw"},
                                             {MmdSpace::transformed, "transformed"}};
constexpr EnumName<InitKind> kInits[] = {{InitKind::random, "random"}, {InitKind::rotated, "rotated"}};
constexpr EnumName<oracle::DiscMode> kDiscModes[] = {
    {oracle::DiscMode::best_response, "best_response"},
    {oracle::DiscMode::gradient_ascent, "ascent"}};

}  // namespace

std::string_view to_string(Dataset d) { return enum_name(d, kDatasets); }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "method",      "dataset",     "K",           "seed",          "steps",
      "batch",       "n_dis",       "lr",          "beta1",         "beta2",
      "lambda_d",    "lambda_g",    "loss_form",   "gen_loss",      "mmd_samples",
      "mmd_space",   "out_dir",     "latent_dim",  "hidden",        "hidden_layers",
      "identity_weight", "mode_sigma", "leak_radius", "space_size",  "init",
      "disc_mode",   "descent_lr",  "disc_lr"};
  return keys;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
  const auto v = trim(raw);
  if (key == "method") {
    try {
      c.method = parse_method(v);
    } catch (const std::invalid_argument&) {
      bad_value(key, v, "gan|ssgan|ssgan_ms|dagan|dagan_plus|dagan_md|ssgan_la|ssgan_la_plus");
    }
  } else if (key == "dataset") c.dataset = parse_enum(key, v, kDatasets, "gauss1d_shift|modes2d_rot|finite");
  else if (key == "K") c.K = to_size(key, v);
  else if (key == "seed") c.seed = to_u64(key, v);
  else if (key == "steps") c.steps = to_size(key, v);
  else if (key == "batch") c.batch = to_size(key, v);
  else if (key == "n_dis") c.n_dis = to_size(key, v);
  else if (key == "lr") c.lr = to_double(key, v);
  else if (key == "beta1") c.beta1 = to_double(key, v);
  else if (key == "beta2") c.beta2 = to_double(key, v);
  else if (key == "lambda_d") c.lambda_d = to_double(key, v);
  else if (key == "lambda_g") c.lambda_g = to_double(key, v);
  else if (key == "loss_form") c.loss_form = parse_enum(key, v, kForms, "log|hinge");
  else if (key == "gen_loss") c.gen_loss = parse_enum(key, v, kGenLosses, "minimax|non_saturating");
  else if (key == "mmd_samples") c.mmd_samples = to_size(key, v);
  else if (key == "mmd_space") c.mmd_space = parse_enum(key, v, kMmdSpaces, "raw|transformed");
  else if (key == "out_dir") c.out_dir = std::string(v);
  else if (key == "latent_dim") c.latent_dim = to_size(key, v);
  else if (key == "hidden") c.hidden = to_size(key, v);
  else if (key == "hidden_layers") c.hidden_layers = to_size(key, v);
  else if (key == "identity_weight") c.identity_weight = to_double(key, v);
  else if (key == "mode_sigma") c.mode_sigma = to_double(key, v);
  else if (key == "leak_radius") c.leak_radius = to_double(key, v);
  else if (key == "space_size") c.space_size = to_size(key, v);
  else if (key == "init") c.init = parse_enum(key, v, kInits, "random|rotated");
  else if (key == "disc_mode") c.disc_mode = parse_enum(key, v, kDiscModes, "best_response|ascent");
  else if (key == "descent_lr") c.descent_lr = to_double(key, v);
  else if (key == "disc_lr") c.disc_lr = to_double(key, v);
  else throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

void apply_assignment(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("config: expected key=value, got '" + std::string(assignment) + "'");
  const auto key = trim(assignment.substr(0, eq));
  if (key.empty()) throw ConfigError("config: empty key in '" + std::string(assignment) + "'");
  apply_setting(cfg, key, assignment.substr(eq + 1));
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                        std::string(key) + "'");
    try {
      apply_setting(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  try {
    c.method_config().validate();
  } catch (const objectives::LossError& e) {
    fail(e.what());
  }
  if (c.K < 1) fail("K must be at least 1");
  if (c.steps < 1) fail("steps must be at least 1");
  if (c.batch < 1) fail("batch must be at least 1");
  if (!(c.lr > 0.0 && std::isfinite(c.lr))) fail("lr must be positive");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0)) fail("beta1 must lie in [0, 1)");
  if (!(c.beta2 >= 0.0 && c.beta2 < 1.0)) fail("beta2 must lie in [0, 1)");
  if (c.mmd_samples < 2) fail("mmd_samples must be at least 2");
  if (c.latent_dim < 1) fail("latent_dim must be at least 1");
  if (c.hidden_layers > 0 && c.hidden < 1) fail("hidden must be at least 1");
  if (!(c.identity_weight > 0.0 && c.identity_weight < 1.0)) fail("identity_weight must lie in (0, 1)");
  if (c.out_dir.empty()) fail("out_dir must not be empty");
  switch (c.dataset) {
    case Dataset::gauss1d_shift:
      break;
    case Dataset::modes2d_rot:
      if (c.K > 4) fail("modes2d_rot supports at most 4 quarter-turn rotations");
      if (!(c.mode_sigma > 0.0)) fail("mode_sigma must be positive");
      if (!(c.leak_radius > 0.0)) fail("leak_radius must be positive");
      break;
    case Dataset::finite:
      if (c.space_size < 2) fail("space_size must be at least 2");
      if (c.space_size % c.K != 0) fail("K must divide space_size for the cyclic group");
      if (!(c.descent_lr > 0.0)) fail("descent_lr must be positive");
      if (!(c.disc_lr > 0.0)) fail("disc_lr must be positive");
      if (c.method == Method::ssgan_la_plus) fail("ssgan_la_plus has no exact finite form");
      if (c.init == InitKind::rotated && c.K < 2) fail("init=rotated needs K >= 2");
      break;
  }
  if (c.method == Method::dagan_plus && c.K < 2) fail("dagan_plus needs K >= 2");
}

std::map<std::string, std::string> config_pairs(const RunConfig& c) {
  std::map<std::string, std::string> m;
  m["method"] = std::string(to_string(c.method));
  m["dataset"] = std::string(to_string(c.dataset));
  m["K"] = std::to_string(c.K);
  m["seed"] = std::to_string(c.seed);
  m["steps"] = std::to_string(c.steps);
  m["batch"] = std::to_string(c.batch);
  m["n_dis"] = std::to_string(c.n_dis);
  m["lr"] = fmt(c.lr);
  m["beta1"] = fmt(c.beta1);
  m["beta2"] = fmt(c.beta2);
  if (c.lambda_d) m["lambda_d"] = fmt(*c.lambda_d);
  if (c.lambda_g) m["lambda_g"] = fmt(*c.lambda_g);
  m["loss_form"] = enum_name(c.loss_form, kForms);
  m["gen_loss"] = enum_name(c.gen_loss, kGenLosses);
  m["mmd_samples"] = std::to_string(c.mmd_samples);
  m["mmd_space"] = enum_name(c.mmd_space, kMmdSpaces);
  m["out_dir"] = c.out_dir;
  m["latent_dim"] = std::to_string(c.latent_dim);
  m["hidden"] = std::to_string(c.hidden);
  m["hidden_layers"] = std::to_string(c.hidden_layers);
  m["identity_weight"] = fmt(c.identity_weight);
  m["mode_sigma"] = fmt(c.mode_sigma);
  m["leak_radius"] = fmt(c.leak_radius);
  m["space_size"] = std::to_string(c.space_size);
  m["init"] = enum_name(c.init, kInits);
  m["disc_mode"] = enum_name(c.disc_mode, kDiscModes);
  m["descent_lr"] = fmt(c.descent_lr);
  m["disc_lr"] = fmt(c.disc_lr);
  return m;
}

std::string emit_config(const RunConfig& c) {
  const auto pairs = config_pairs(c);
  std::string out;
  for (const auto& key : config_keys()) {
    auto it = pairs.find(key);
    if (it == pairs.end()) continue;
    out += key + "=" + it->second + "\n";
  }
  return out;
}

objectives::MethodConfig RunConfig::method_config() const {
  objectives::MethodConfig m;
  m.method = method;
  m.lambda_d = lambda_d;
  m.lambda_g = lambda_g;
  m.form = loss_form;
  m.gen_loss = gen_loss;
  m.n_dis = n_dis;
  return m;
}

models::NetConfig RunConfig::net_config() const { return {latent_dim, hidden, hidden_layers}; }

double RunConfig::resolved_lambda_d() const { return uses_tradeoff(method) ? lambda_d.value_or(1.0) : 0.0; }
double RunConfig::resolved_lambda_g() const { return uses_tradeoff(method) ? lambda_g.value_or(1.0) : 0.0; }

}  // namespace lagan
