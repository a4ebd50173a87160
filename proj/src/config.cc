#include "bseg/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bseg/errors.h"

namespace bseg {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    out.push_back(parse_number<int>(key, trim(item)));
  }
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

using Setter = std::function<void(Settings&, const std::string& key, const std::string& v)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"graph.thickness",
       [](Settings& s, auto& k, auto& v) { s.pipeline.thickness = parse_number<int>(k, v); }},
      {"graph.k", [](Settings& s, auto& k, auto& v) { s.pipeline.k = parse_number<int>(k, v); }},
      {"features.spec",
       [](Settings& s, auto&, auto& v) { s.pipeline.features = parse_feature_spec(v); }},
      {"data.num_classes",
       [](Settings& s, auto& k, auto& v) {
         s.pipeline.gcn.num_classes = parse_number<int>(k, v);
         s.synth.num_classes = s.pipeline.gcn.num_classes;
       }},
      {"data.void_label",
       [](Settings& s, auto& k, auto& v) {
         if (v == "none") {
           s.pipeline.void_label.reset();
         } else {
           s.pipeline.void_label = parse_number<int>(k, v);
         }
       }},
      {"gcn.hidden",
       [](Settings& s, auto& k, auto& v) { s.pipeline.gcn.hidden_channels = parse_int_list(k, v); }},
      {"gcn.dropout",
       [](Settings& s, auto& k, auto& v) { s.pipeline.gcn.dropout_rate = parse_number<double>(k, v); }},
      {"gcn.l2",
       [](Settings& s, auto& k, auto& v) { s.pipeline.gcn.l2_coeff = parse_number<double>(k, v); }},
      {"gcn.learning_rate",
       [](Settings& s, auto& k, auto& v) { s.pipeline.gcn.learning_rate = parse_number<double>(k, v); }},
      {"gcn.beta1",
       [](Settings& s, auto& k, auto& v) { s.pipeline.gcn.adam_beta1 = parse_number<double>(k, v); }},
      {"gcn.beta2",
       [](Settings& s, auto& k, auto& v) { s.pipeline.gcn.adam_beta2 = parse_number<double>(k, v); }},
      {"gcn.epsilon",
       [](Settings& s, auto& k, auto& v) { s.pipeline.gcn.adam_epsilon = parse_number<double>(k, v); }},
      {"gcn.seed",
       [](Settings& s, auto& k, auto& v) { s.pipeline.gcn.seed = parse_number<uint32_t>(k, v); }},
      {"train.epochs",
       [](Settings& s, auto& k, auto& v) { s.pipeline.epochs = parse_number<int>(k, v); }},
      {"train.val_every",
       [](Settings& s, auto& k, auto& v) { s.pipeline.val_every = parse_number<int>(k, v); }},
      {"train.shuffle",
       [](Settings& s, auto& k, auto& v) { s.pipeline.shuffle = parse_bool(k, v); }},
      {"synth.train_frames",
       [](Settings& s, auto& k, auto& v) { s.synth_train_frames = parse_number<int>(k, v); }},
      {"synth.val_frames",
       [](Settings& s, auto& k, auto& v) { s.synth_val_frames = parse_number<int>(k, v); }},
      {"synth.test_frames",
       [](Settings& s, auto& k, auto& v) { s.synth_test_frames = parse_number<int>(k, v); }},
      {"synth.height",
       [](Settings& s, auto& k, auto& v) { s.synth.height = parse_number<int>(k, v); }},
      {"synth.width",
       [](Settings& s, auto& k, auto& v) { s.synth.width = parse_number<int>(k, v); }},
      {"synth.min_shapes",
       [](Settings& s, auto& k, auto& v) { s.synth.min_shapes = parse_number<int>(k, v); }},
      {"synth.max_shapes",
       [](Settings& s, auto& k, auto& v) { s.synth.max_shapes = parse_number<int>(k, v); }},
      {"synth.min_shape_size",
       [](Settings& s, auto& k, auto& v) { s.synth.min_shape_size = parse_number<int>(k, v); }},
      {"synth.max_shape_size",
       [](Settings& s, auto& k, auto& v) { s.synth.max_shape_size = parse_number<int>(k, v); }},
      {"synth.rectangles",
       [](Settings& s, auto& k, auto& v) { s.synth.rectangles = parse_bool(k, v); }},
      {"synth.circles",
       [](Settings& s, auto& k, auto& v) { s.synth.circles = parse_bool(k, v); }},
      {"synth.corruption",
       [](Settings& s, auto& k, auto& v) {
         if (v == "flip") {
           s.synth.corruption = Corruption::kFlip;
         } else if (v == "dilate") {
           s.synth.corruption = Corruption::kDilate;
         } else {
           throw ConfigError("invalid value '" + v + "' for " + k + " (flip|dilate)");
         }
       }},
      {"synth.radius",
       [](Settings& s, auto& k, auto& v) { s.synth.radius = parse_number<int>(k, v); }},
      {"synth.flip_probability",
       [](Settings& s, auto& k, auto& v) { s.synth.flip_probability = parse_number<double>(k, v); }},
      {"synth.noise_sigma",
       [](Settings& s, auto& k, auto& v) { s.synth.noise_sigma = parse_number<double>(k, v); }},
      {"synth.extras_channels",
       [](Settings& s, auto& k, auto& v) { s.synth.extras_channels = parse_number<int>(k, v); }},
      {"synth.seed",
       [](Settings& s, auto& k, auto& v) { s.synth.seed = parse_number<uint64_t>(k, v); }},
      {"ablate.feature_grid",
       [](Settings& s, auto&, auto& v) {
         s.feature_grid.clear();
         std::stringstream ss(v);
         for (std::string spec; std::getline(ss, spec, ';');) {
           if (!trim(spec).empty()) s.feature_grid.push_back(parse_feature_spec(spec));
         }
         if (s.feature_grid.empty()) throw ConfigError("ablate.feature_grid is empty");
       }},
  };
  return table;
}

}  // namespace

void apply_setting(Settings& s, const std::string& key, const std::string& value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(s, key, trim(value));
}

void apply_override(Settings& s, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  apply_setting(s, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void parse_settings(Settings& s, std::istream& in, const std::string& origin) {
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    try {
      apply_setting(s, section.empty() ? key : section + "." + key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

Settings load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Settings s;
  parse_settings(s, in, path);
  return s;
}

void write_pipeline_settings(std::ostream& out, const Settings& s) {
  const PipelineConfig& p = s.pipeline;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  auto join = [](const auto& items) {
    std::ostringstream os;
    for (size_t i = 0; i < items.size(); ++i) os << (i ? "," : "") << items[i];
    return os.str();
  };
  out << "[data]\n"
      << "num_classes = " << p.gcn.num_classes << "\n"
      << "void_label = " << (p.void_label ? std::to_string(*p.void_label) : "none") << "\n\n"
      << "[graph]\n"
      << "thickness = " << p.thickness << "\n"
      << "k = " << p.k << "\n\n"
      << "[features]\n"
      << "spec = " << join(p.features) << "\n\n"
      << "[gcn]\n"
      << "hidden = " << join(p.gcn.hidden_channels) << "\n"
      << "dropout = " << num(p.gcn.dropout_rate) << "\n"
      << "l2 = " << num(p.gcn.l2_coeff) << "\n"
      << "learning_rate = " << num(p.gcn.learning_rate) << "\n"
      << "beta1 = " << num(p.gcn.adam_beta1) << "\n"
      << "beta2 = " << num(p.gcn.adam_beta2) << "\n"
      << "epsilon = " << num(p.gcn.adam_epsilon) << "\n"
      << "seed = " << p.gcn.seed << "\n\n"
      << "[train]\n"
      << "epochs = " << p.epochs << "\n"
      << "val_every = " << p.val_every << "\n"
      << "shuffle = " << (p.shuffle ? "true" : "false") << "\n";
}

std::vector<std::string> known_setting_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

}  // namespace bseg
