#include "matnet/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace matnet {

namespace {

const std::set<std::string> kExperiments = {
    "ffn-classify", "autoencoder",  "seq2seq",
    "spectrogram-classify", "graph-nodes", "param-count"};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

long long parse_int(const std::string& where, const std::string& raw) {
  long long v = 0;
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(where + ": expected an integer, got '" + raw + "'");
  }
  return v;
}

double parse_double(const std::string& where, const std::string& raw) {
  try {
    std::size_t used = 0;
    double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + raw + "'");
  }
}

bool parse_bool(const std::string& where, const std::string& raw) {
  if (raw == "true" || raw == "on" || raw == "1") return true;
  if (raw == "false" || raw == "off" || raw == "0") return false;
  throw ConfigError(where + ": expected true/false, got '" + raw + "'");
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

Field int_field(int ExperimentConfig::Model::*ptr) {
  return {[ptr](ExperimentConfig& c, const std::string& where, const std::string& raw) {
            c.model.*ptr = static_cast<int>(parse_int(where, raw));
          },
          [ptr](const ExperimentConfig& c) { return std::to_string(c.model.*ptr); }};
}
Field int_field(int ExperimentConfig::Data::*ptr) {
  return {[ptr](ExperimentConfig& c, const std::string& where, const std::string& raw) {
            c.data.*ptr = static_cast<int>(parse_int(where, raw));
          },
          [ptr](const ExperimentConfig& c) { return std::to_string(c.data.*ptr); }};
}
Field str_field(std::string ExperimentConfig::Model::*ptr) {
  return {[ptr](ExperimentConfig& c, const std::string&, const std::string& raw) {
            c.model.*ptr = raw;
          },
          [ptr](const ExperimentConfig& c) { return c.model.*ptr; }};
}
Field str_field(std::string ExperimentConfig::Data::*ptr) {
  return {[ptr](ExperimentConfig& c, const std::string&, const std::string& raw) {
            c.data.*ptr = raw;
          },
          [ptr](const ExperimentConfig& c) { return c.data.*ptr; }};
}
Field dbl_field(double ExperimentConfig::Model::*ptr) {
  return {[ptr](ExperimentConfig& c, const std::string& where, const std::string& raw) {
            c.model.*ptr = parse_double(where, raw);
          },
          [ptr](const ExperimentConfig& c) { return format_double(c.model.*ptr); }};
}
Field dbl_field(double ExperimentConfig::Optimizer::*ptr) {
  return {[ptr](ExperimentConfig& c, const std::string& where, const std::string& raw) {
            c.optimizer.*ptr = parse_double(where, raw);
          },
          [ptr](const ExperimentConfig& c) { return format_double(c.optimizer.*ptr); }};
}
Field dbl_field(double ExperimentConfig::Data::*ptr) {
  return {[ptr](ExperimentConfig& c, const std::string& where, const std::string& raw) {
            c.data.*ptr = parse_double(where, raw);
          },
          [ptr](const ExperimentConfig& c) { return format_double(c.data.*ptr); }};
}

// Section-qualified key registry; declaration order is the canonical
// serialization order.
const std::vector<std::pair<std::string, Field>>& field_registry() {
  static const std::vector<std::pair<std::string, Field>> fields = [] {
    std::vector<std::pair<std::string, Field>> f;
    f.emplace_back("experiment",
                   Field{[](ExperimentConfig& c, const std::string& where,
                            const std::string& raw) {
                           if (!kExperiments.count(raw)) {
                             throw ConfigError(where + ": unknown experiment '" + raw + "'");
                           }
                           c.experiment = raw;
                         },
                         [](const ExperimentConfig& c) { return c.experiment; }});
    f.emplace_back("seed",
                   Field{[](ExperimentConfig& c, const std::string& where,
                            const std::string& raw) {
                           c.seed = static_cast<std::uint64_t>(parse_int(where, raw));
                         },
                         [](const ExperimentConfig& c) { return std::to_string(c.seed); }});

    f.emplace_back("model.depth", int_field(&ExperimentConfig::Model::depth));
    f.emplace_back("model.hidden_rows", int_field(&ExperimentConfig::Model::hidden_rows));
    f.emplace_back("model.hidden_cols", int_field(&ExperimentConfig::Model::hidden_cols));
    f.emplace_back("model.activation", str_field(&ExperimentConfig::Model::activation));
    f.emplace_back("model.skip", str_field(&ExperimentConfig::Model::skip));
    f.emplace_back("model.batch_norm",
                   Field{[](ExperimentConfig& c, const std::string& where,
                            const std::string& raw) {
                           c.model.batch_norm = parse_bool(where, raw);
                         },
                         [](const ExperimentConfig& c) {
                           return c.model.batch_norm ? std::string("true")
                                                     : std::string("false");
                         }});
    f.emplace_back("model.dropout_input", dbl_field(&ExperimentConfig::Model::dropout_input));
    f.emplace_back("model.dropout_hidden",
                   dbl_field(&ExperimentConfig::Model::dropout_hidden));
    f.emplace_back("model.cell", str_field(&ExperimentConfig::Model::cell));
    f.emplace_back("model.output_activation",
                   str_field(&ExperimentConfig::Model::output_activation));
    f.emplace_back("model.attention_heads",
                   int_field(&ExperimentConfig::Model::attention_heads));
    f.emplace_back("model.column_height", int_field(&ExperimentConfig::Model::column_height));
    f.emplace_back("model.hidden_dim", int_field(&ExperimentConfig::Model::hidden_dim));
    f.emplace_back("model.neighbor_samples",
                   int_field(&ExperimentConfig::Model::neighbor_samples));
    f.emplace_back("model.frontend", str_field(&ExperimentConfig::Model::frontend));
    f.emplace_back("model.frontend_bands",
                   int_field(&ExperimentConfig::Model::frontend_bands));
    f.emplace_back("model.frontend_rows", int_field(&ExperimentConfig::Model::frontend_rows));
    f.emplace_back("model.frontend_cols", int_field(&ExperimentConfig::Model::frontend_cols));
    f.emplace_back("model.in_rows", int_field(&ExperimentConfig::Model::in_rows));
    f.emplace_back("model.in_cols", int_field(&ExperimentConfig::Model::in_cols));
    f.emplace_back("model.out_rows", int_field(&ExperimentConfig::Model::out_rows));
    f.emplace_back("model.out_cols", int_field(&ExperimentConfig::Model::out_cols));

    f.emplace_back("optimizer.lr", dbl_field(&ExperimentConfig::Optimizer::lr));
    f.emplace_back("optimizer.beta1", dbl_field(&ExperimentConfig::Optimizer::beta1));
    f.emplace_back("optimizer.beta2", dbl_field(&ExperimentConfig::Optimizer::beta2));
    f.emplace_back("optimizer.eps", dbl_field(&ExperimentConfig::Optimizer::eps));
    f.emplace_back("optimizer.batch_size",
                   Field{[](ExperimentConfig& c, const std::string& where,
                            const std::string& raw) {
                           c.optimizer.batch_size =
                               static_cast<int>(parse_int(where, raw));
                         },
                         [](const ExperimentConfig& c) {
                           return std::to_string(c.optimizer.batch_size);
                         }});
    f.emplace_back("optimizer.l1", dbl_field(&ExperimentConfig::Optimizer::l1));
    f.emplace_back("optimizer.l2", dbl_field(&ExperimentConfig::Optimizer::l2));
    f.emplace_back("optimizer.loss",
                   Field{[](ExperimentConfig& c, const std::string&,
                            const std::string& raw) { c.optimizer.loss = raw; },
                         [](const ExperimentConfig& c) { return c.optimizer.loss; }});

    f.emplace_back("data.source", str_field(&ExperimentConfig::Data::source));
    f.emplace_back("data.images", str_field(&ExperimentConfig::Data::images));
    f.emplace_back("data.labels", str_field(&ExperimentConfig::Data::labels));
    f.emplace_back("data.edges", str_field(&ExperimentConfig::Data::edges));
    f.emplace_back("data.features", str_field(&ExperimentConfig::Data::features));
    f.emplace_back("data.node_labels", str_field(&ExperimentConfig::Data::node_labels));
    f.emplace_back("data.samples", int_field(&ExperimentConfig::Data::samples));
    f.emplace_back("data.classes", int_field(&ExperimentConfig::Data::classes));
    f.emplace_back("data.rows", int_field(&ExperimentConfig::Data::rows));
    f.emplace_back("data.cols", int_field(&ExperimentConfig::Data::cols));
    f.emplace_back("data.sequences", int_field(&ExperimentConfig::Data::sequences));
    f.emplace_back("data.context", int_field(&ExperimentConfig::Data::context));
    f.emplace_back("data.horizon", int_field(&ExperimentConfig::Data::horizon));
    f.emplace_back("data.frame", int_field(&ExperimentConfig::Data::frame));
    f.emplace_back("data.digits", int_field(&ExperimentConfig::Data::digits));
    f.emplace_back("data.trials", int_field(&ExperimentConfig::Data::trials));
    f.emplace_back("data.channels", int_field(&ExperimentConfig::Data::channels));
    f.emplace_back("data.signal_samples",
                   int_field(&ExperimentConfig::Data::signal_samples));
    f.emplace_back("data.nodes", int_field(&ExperimentConfig::Data::nodes));
    f.emplace_back("data.feature_dim", int_field(&ExperimentConfig::Data::feature_dim));
    f.emplace_back("data.p_in", dbl_field(&ExperimentConfig::Data::p_in));
    f.emplace_back("data.p_out", dbl_field(&ExperimentConfig::Data::p_out));
    f.emplace_back("data.val_fraction", dbl_field(&ExperimentConfig::Data::val_fraction));
    f.emplace_back("data.test_fraction", dbl_field(&ExperimentConfig::Data::test_fraction));
    f.emplace_back("data.noise", str_field(&ExperimentConfig::Data::noise));
    f.emplace_back("data.noise_ratio", dbl_field(&ExperimentConfig::Data::noise_ratio));

    f.emplace_back("stopping.epochs",
                   Field{[](ExperimentConfig& c, const std::string& where,
                            const std::string& raw) {
                           c.stopping.epochs = static_cast<int>(parse_int(where, raw));
                         },
                         [](const ExperimentConfig& c) {
                           return std::to_string(c.stopping.epochs);
                         }});
    f.emplace_back("stopping.patience",
                   Field{[](ExperimentConfig& c, const std::string& where,
                            const std::string& raw) {
                           c.stopping.patience = static_cast<int>(parse_int(where, raw));
                         },
                         [](const ExperimentConfig& c) {
                           return std::to_string(c.stopping.patience);
                         }});

    f.emplace_back("run.timing",
                   Field{[](ExperimentConfig& c, const std::string& where,
                            const std::string& raw) {
                           c.run.timing = parse_bool(where, raw);
                         },
                         [](const ExperimentConfig& c) {
                           return c.run.timing ? std::string("true") : std::string("false");
                         }});
    return f;
  }();
  return fields;
}

const Field* find_field(const std::string& qualified) {
  for (const auto& [name, field] : field_registry()) {
    if (name == qualified) return &field;
  }
  return nullptr;
}

void check_in(const std::string& key, const std::string& value,
              std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string opts;
  for (const char* a : allowed) {
    if (!opts.empty()) opts += ", ";
    opts += a;
  }
  throw ConfigError(key + ": '" + value + "' not one of {" + opts + "}");
}

void validate(const ExperimentConfig& c) {
  if (c.experiment.empty()) throw ConfigError("experiment: required key missing");
  check_in("model.activation", c.model.activation, {"identity", "sigmoid", "tanh", "relu"});
  check_in("model.skip", c.model.skip, {"none", "highway", "resnet"});
  check_in("model.cell", c.model.cell, {"rnn", "lstm", "gru"});
  check_in("model.output_activation", c.model.output_activation,
           {"identity", "sigmoid", "tanh", "relu"});
  check_in("model.frontend", c.model.frontend, {"none", "tensor-map"});
  check_in("optimizer.loss", c.optimizer.loss, {"mse", "bce"});
  check_in("data.noise", c.data.noise, {"none", "masking", "gaussian"});

  auto positive = [](const std::string& key, long long v) {
    if (v < 1) throw ConfigError(key + ": must be >= 1, got " + std::to_string(v));
  };
  positive("model.depth", c.model.depth);
  positive("model.hidden_rows", c.model.hidden_rows);
  positive("model.hidden_cols", c.model.hidden_cols);
  positive("model.column_height", c.model.column_height);
  positive("model.hidden_dim", c.model.hidden_dim);
  positive("model.neighbor_samples", c.model.neighbor_samples);
  positive("model.frontend_bands", c.model.frontend_bands);
  positive("model.in_rows", c.model.in_rows);
  positive("model.in_cols", c.model.in_cols);
  positive("model.out_rows", c.model.out_rows);
  positive("model.out_cols", c.model.out_cols);
  positive("optimizer.batch_size", c.optimizer.batch_size);
  positive("stopping.epochs", c.stopping.epochs);
  positive("stopping.patience", c.stopping.patience);
  if (c.model.attention_heads < 0) {
    throw ConfigError("model.attention_heads: must be >= 0");
  }

  auto rate = [](const std::string& key, double v) {
    if (v < 0.0 || v >= 1.0) {
      throw ConfigError(key + ": must be in [0, 1), got " + format_double(v));
    }
  };
  rate("model.dropout_input", c.model.dropout_input);
  rate("model.dropout_hidden", c.model.dropout_hidden);
  if (c.data.noise_ratio < 0.0 || c.data.noise_ratio > 1.0) {
    throw ConfigError("data.noise_ratio: must be in [0, 1]");
  }
  if (c.optimizer.l1 < 0.0 || c.optimizer.l2 < 0.0) {
    throw ConfigError("optimizer.l1/l2: must be >= 0");
  }
  if (c.optimizer.lr <= 0.0) throw ConfigError("optimizer.lr: must be > 0");
  if (c.model.batch_norm && c.model.skip != "none") {
    throw ConfigError("model.batch_norm: only supported with model.skip = none");
  }
  if (c.experiment == "autoencoder" && c.model.depth < 2) {
    throw ConfigError("model.depth: autoencoder needs depth >= 2");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  bool seed_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section != "model" && section != "optimizer" && section != "data" &&
          section != "stopping" && section != "run") {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" +
                          section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    const std::string qualified = section.empty() ? key : section + "." + key;
    const Field* field = find_field(qualified);
    if (!field) {
      throw ConfigError("unknown key '" + qualified + "' (line " +
                        std::to_string(line_no) + ")");
    }
    field->set(cfg, qualified, value);
    if (qualified == "seed") seed_seen = true;
  }
  if (!seed_seen) {
    throw ConfigError("seed: required key missing (seeds are mandatory; there is no "
                      "wall-clock default)");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string current_section;
  for (const auto& [name, field] : field_registry()) {
    const auto dot = name.find('.');
    const std::string section = dot == std::string::npos ? "" : name.substr(0, dot);
    const std::string key = dot == std::string::npos ? name : name.substr(dot + 1);
    if (section != current_section) {
      out << "\n[" << section << "]\n";
      current_section = section;
    }
    out << key << " = " << field.get(cfg) << "\n";
  }
  return out.str();
}

}  // namespace matnet
