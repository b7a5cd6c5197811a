#include "harness/config.h"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "common/errors.h"
#include "common/format.h"

namespace ivae {
namespace {

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

bool ParseBool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("not a boolean: '" + std::string(v) + "'");
}

std::string BoolText(bool b) { return b ? "true" : "false"; }

int ParseCount(std::string_view v) {
  const long long n = ParseInt(v);
  if (n < -(1LL << 31) || n > (1LL << 31) - 1) {
    throw InvalidArgument("integer out of range: '" + std::string(v) + "'");
  }
  return static_cast<int>(n);
}

std::uint64_t ParseSeed(std::string_view v) {
  v = Trim(v);
  std::uint64_t seed = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("not a seed: '" + std::string(v) + "'");
  }
  return seed;
}

template <typename T, typename F>
std::vector<T> ParseList(std::string_view v, F parse) {
  std::vector<T> out;
  for (const std::string& item : SplitString(v, ',')) {
    const std::string_view s = Trim(item);
    if (!s.empty()) out.push_back(parse(s));
  }
  return out;
}

template <typename T, typename F>
std::string JoinList(const std::vector<T>& items, F format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += format(items[i]);
  }
  return out;
}

std::string IntText(int v) { return std::to_string(v); }

#define IVAE_DOUBLE_FIELD(key, member)                                       \
  {key,                                                                      \
   {[](RunConfig& c, std::string_view v) { c.member = ParseDouble(v); },     \
    [](const RunConfig& c) { return FormatDouble(c.member); }}}
#define IVAE_INT_FIELD(key, member)                                          \
  {key,                                                                      \
   {[](RunConfig& c, std::string_view v) { c.member = ParseCount(v); },      \
    [](const RunConfig& c) { return std::to_string(c.member); }}}
#define IVAE_BOOL_FIELD(key, member)                                         \
  {key,                                                                      \
   {[](RunConfig& c, std::string_view v) { c.member = ParseBool(v); },       \
    [](const RunConfig& c) { return BoolText(c.member); }}}
#define IVAE_SEED_FIELD(key, member)                                         \
  {key,                                                                      \
   {[](RunConfig& c, std::string_view v) { c.member = ParseSeed(v); },       \
    [](const RunConfig& c) { return std::to_string(c.member); }}}
#define IVAE_STRING_FIELD(key, member)                                       \
  {key,                                                                      \
   {[](RunConfig& c, std::string_view v) { c.member = std::string(v); },     \
    [](const RunConfig& c) { return c.member; }}}

const std::map<std::string, Field, std::less<>>& Fields() {
  static const std::map<std::string, Field, std::less<>> fields = {
      IVAE_SEED_FIELD("synth.seed", synth.seed),
      {"synth.setting",
       {[](RunConfig& c, std::string_view v) { c.synth.setting = ParseSetting(v); },
        [](const RunConfig& c) { return std::string(SettingName(c.synth.setting)); }}},
      {"synth.outcome_kind",
       {[](RunConfig& c, std::string_view v) {
          c.synth.outcome_kind = ParseOutcomeKind(v);
        },
        [](const RunConfig& c) {
          return std::string(OutcomeKindName(c.synth.outcome_kind));
        }}},
      IVAE_DOUBLE_FIELD("synth.alpha", synth.alpha),
      IVAE_DOUBLE_FIELD("synth.beta", synth.beta),
      IVAE_INT_FIELD("synth.covariate_dim", synth.covariate_dim),
      IVAE_INT_FIELD("synth.n_points", synth.n_points),

      IVAE_INT_FIELD("model.latent_dim", model.latent_dim),
      {"model.hidden",
       {[](RunConfig& c, std::string_view v) {
          c.model.hidden = ParseList<int>(v, ParseCount);
        },
        [](const RunConfig& c) { return JoinList(c.model.hidden, IntText); }}},
      {"model.activation",
       {[](RunConfig& c, std::string_view v) {
          c.model.activation = ParseActivation(v);
        },
        [](const RunConfig& c) {
          return std::string(ActivationName(c.model.activation));
        }}},
      IVAE_BOOL_FIELD("model.balanced_prior", model.balanced_prior),
      IVAE_BOOL_FIELD("model.separate_decoder_heads", model.separate_decoder_heads),
      IVAE_BOOL_FIELD("model.learn_decoder_noise", model.learn_decoder_noise),
      IVAE_DOUBLE_FIELD("model.decoder_noise_variance", model.decoder_noise_variance),
      IVAE_SEED_FIELD("model.seed", model.seed),

      IVAE_DOUBLE_FIELD("train.learning_rate", train.learning_rate),
      IVAE_INT_FIELD("train.batch_size", train.batch_size),
      IVAE_INT_FIELD("train.max_epochs", train.max_epochs),
      {"train.patience",
       {[](RunConfig& c, std::string_view v) {
          c.train.patience = (Trim(v) == "inf") ? TrainConfig::kNoEarlyStopping
                                                : ParseCount(v);
        },
        [](const RunConfig& c) {
          return c.train.patience >= TrainConfig::kNoEarlyStopping
                     ? std::string("inf")
                     : std::to_string(c.train.patience);
        }}},
      IVAE_INT_FIELD("train.eval_every", train.eval_every),
      IVAE_SEED_FIELD("train.seed", train.seed),
      IVAE_INT_FIELD("train.mc_samples", train.mc_samples),

      IVAE_INT_FIELD("eval.mc_draws", eval.mc_draws),
      IVAE_BOOL_FIELD("eval.baseline", eval.baseline),
      {"eval.baseline_hidden",
       {[](RunConfig& c, std::string_view v) {
          c.eval.baseline_hidden = ParseList<int>(v, ParseCount);
        },
        [](const RunConfig& c) { return JoinList(c.eval.baseline_hidden, IntText); }}},
      IVAE_DOUBLE_FIELD("eval.baseline_learning_rate", eval.baseline_learning_rate),
      IVAE_INT_FIELD("eval.baseline_max_epochs", eval.baseline_max_epochs),
      IVAE_INT_FIELD("eval.baseline_patience", eval.baseline_patience),
      IVAE_SEED_FIELD("eval.seed", eval.seed),

      IVAE_INT_FIELD("sweep.n_models", sweep.n_models),
      {"sweep.settings",
       {[](RunConfig& c, std::string_view v) {
          c.sweep.settings = ParseList<CausalSetting>(v, ParseSetting);
        },
        [](const RunConfig& c) {
          return JoinList(c.sweep.settings, [](CausalSetting s) {
            return std::string(SettingName(s));
          });
        }}},
      {"sweep.outcome_kind",
       {[](RunConfig& c, std::string_view v) {
          c.sweep.outcome_kind = ParseOutcomeKind(v);
        },
        [](const RunConfig& c) {
          return std::string(OutcomeKindName(c.sweep.outcome_kind));
        }}},
      {"sweep.alpha",
       {[](RunConfig& c, std::string_view v) {
          c.sweep.alphas = ParseList<double>(v, ParseDouble);
        },
        [](const RunConfig& c) { return JoinList(c.sweep.alphas, FormatDouble); }}},
      {"sweep.beta",
       {[](RunConfig& c, std::string_view v) {
          c.sweep.betas = ParseList<double>(v, ParseDouble);
        },
        [](const RunConfig& c) { return JoinList(c.sweep.betas, FormatDouble); }}},
      IVAE_SEED_FIELD("sweep.base_seed", sweep.base_seed),
      IVAE_INT_FIELD("sweep.jobs", sweep.jobs),
      IVAE_BOOL_FIELD("sweep.normalize_ate", sweep.normalize_ate),
      IVAE_STRING_FIELD("sweep.output", sweep.output),

      IVAE_STRING_FIELD("ihdp.covariates", ihdp.covariates),
      IVAE_STRING_FIELD("ihdp.format", ihdp.format),
      IVAE_INT_FIELD("ihdp.first_replication", ihdp.first_replication),
      IVAE_INT_FIELD("ihdp.last_replication", ihdp.last_replication),
      IVAE_DOUBLE_FIELD("ihdp.treated_mean_cate", ihdp.treated_mean_cate),
  };
  return fields;
}

#undef IVAE_DOUBLE_FIELD
#undef IVAE_INT_FIELD
#undef IVAE_BOOL_FIELD
#undef IVAE_SEED_FIELD
#undef IVAE_STRING_FIELD

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("train.learning_rate must be finite and >= 0");
  }
  if (batch_size < 1 || max_epochs < 1 || patience < 1 || eval_every < 1 ||
      mc_samples < 1) {
    throw InvalidArgument("train counts must be positive");
  }
}

void RunConfig::Set(std::string_view key, std::string_view value) {
  const auto it = Fields().find(key);
  if (it == Fields().end()) {
    throw InvalidArgument("unknown configuration key '" + std::string(key) + "'");
  }
  try {
    it->second.set(*this, Trim(value));
  } catch (const std::exception& e) {
    throw InvalidArgument("bad value for '" + std::string(key) + "': " + e.what());
  }
}

std::string RunConfig::Get(std::string_view key) const {
  const auto it = Fields().find(key);
  if (it == Fields().end()) {
    throw InvalidArgument("unknown configuration key '" + std::string(key) + "'");
  }
  return it->second.get(*this);
}

std::vector<std::string> RunConfig::Keys() const {
  std::vector<std::string> keys;
  for (const auto& [key, field] : Fields()) keys.push_back(key);
  return keys;
}

void RunConfig::Validate() const {
  synth.Validate();
  VaeConfig m = model;
  m.x_dim = std::max(1, m.x_dim);
  m.Validate();
  train.Validate();
  if (eval.mc_draws < 1) throw InvalidArgument("eval.mc_draws must be >= 1");
  if (eval.baseline_max_epochs < 1 || eval.baseline_patience < 1 ||
      !(eval.baseline_learning_rate >= 0.0)) {
    throw InvalidArgument("invalid baseline settings");
  }
  if (sweep.n_models < 1) throw InvalidArgument("sweep.n_models must be >= 1");
  if (sweep.settings.empty() || sweep.alphas.empty() || sweep.betas.empty()) {
    throw InvalidArgument("sweep grids must be non-empty");
  }
  if (sweep.jobs < 1) throw InvalidArgument("sweep.jobs must be >= 1");
  if (ihdp.first_replication < 0 ||
      ihdp.last_replication < ihdp.first_replication) {
    throw InvalidArgument("invalid IHDP replication range");
  }
}

void MergeIniText(std::string_view text, RunConfig* config) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ParseError("config: key '" + section + "' is outside a section");
    }
    for (const auto& [key, value] : body) {
      config->Set(section + "." + key, value.data());
    }
  }
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open config '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  RunConfig config;
  MergeIniText(text.str(), &config);
  return config;
}

std::string DumpRunConfig(const RunConfig& config) {
  std::string out;
  std::string current;
  for (const auto& [key, field] : Fields()) {
    const std::string section = key.substr(0, key.find('.'));
    if (section != current) {
      if (!current.empty()) out += '\n';
      out += "[" + section + "]\n";
      current = section;
    }
    out += key.substr(key.find('.') + 1) + " = " + field.get(config) + "\n";
  }
  return out;
}

std::string ConfigHeaderComment(const RunConfig& config) {
  std::string out;
  for (const std::string& line : SplitString(DumpRunConfig(config), '\n')) {
    if (!line.empty()) out += "# " + line + "\n";
  }
  return out;
}

std::string DataDirectory() {
  const char* dir = std::getenv("IVAE_DATA_DIR");
  return (dir != nullptr && *dir != '\0') ? std::string(dir) : std::string("data");
}

std::string DefaultIhdpCovariatePath() {
  return DataDirectory() + "/ihdp/ihdp_npci_1.csv";
}

}  // namespace ivae
