// clozerank: learning-to-rank reader for cloze-style question answering
// over anonymized news documents.
//
// Pipeline: featurize (corpus -> ranking feature files), train, predict /
// evaluate, plus the study harnesses (compare / ablate / curve /
// single-feature), a synthetic data generator and corpus statistics.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clozerank/commands.hpp"
#include "clozerank/error.hpp"
#include "clozerank/run_config.hpp"

namespace {

using clozerank::RunConfig;

// One subcommand's options, resolved with precedence
// flag > environment > config file > default.
struct SubOpts {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> given;      // flag storage
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::string> defaults;
  std::vector<std::string> params;               // repeated --param k=v
  std::string config_file;
  void (*body)(const RunConfig&, std::ostream&) = nullptr;

  void add(const std::string& key, const std::string& desc,
           const std::string& def = "") {
    given[key];
    options[key] = app->add_option("--" + key, given[key], desc);
    if (!def.empty()) defaults[key] = def;
  }

  RunConfig resolve() const {
    RunConfig cfg;
    for (const auto& [k, v] : defaults) cfg.set(k, v);
    if (!config_file.empty())
      for (const auto& [k, v] : RunConfig::parse_file(config_file)) cfg.set(k, v);
    for (const auto& [key, _] : options) {
      if (const char* env = std::getenv(RunConfig::env_name(key).c_str()))
        cfg.set(key, env);
    }
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) cfg.set(key, given.at(key));
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos)
        clozerank::raise(clozerank::Errc::config_error,
                         "--param expects name=value, got '" + p + "'");
      cfg.set("param." + p.substr(0, eq), p.substr(eq + 1));
    }
    return cfg;
  }
};

void add_common(SubOpts& s) {
  s.app->add_option("--config", s.config_file, "flat key=value config file");
  s.add("seed", "random seed (reproducibility)", "42");
}

void add_feature_knobs(SubOpts& s) {
  s.add("features", "comma list of FREQ,WA,NBOW,WMD,POS,DEP,FS",
        "WA,NBOW,WMD,FS");
  s.add("wa_penalty", "alignment penalty for unmatched tokens", "10");
  s.add("wa_window", "sentence window for word alignment", "0");
  s.add("pos_window", "sentence window for POS alignment", "0");
  s.add("nbow_window", "sentence window for nBOW similarity", "1");
  s.add("wmd_window", "sentence window for WMD", "1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learning-to-rank reader for cloze-style QA"};
  app.require_subcommand(1);

  std::vector<SubOpts> subs(10);

  {
    SubOpts& s = subs[0];
    s.app = app.add_subcommand("featurize",
                               "extract per-candidate ranking features");
    s.body = clozerank::cmd_featurize;
    add_common(s);
    add_feature_knobs(s);
    s.add("corpus", "corpus directory (split subdirs or question files)");
    s.add("annotations", "annotation sidecar directory");
    s.add("embeddings", "word2vec-format embedding table");
    s.add("output", "output directory for .features/.schema files");
    s.add("coref", "apply coreference substitution (on|off)", "off");
    s.add("threads", "parallel featurization degree (0 = all cores)", "0");
  }
  {
    SubOpts& s = subs[1];
    s.app = app.add_subcommand("train", "train a ranking model");
    s.body = clozerank::cmd_train;
    add_common(s);
    s.add("input", "training feature file");
    s.add("model", "output model path");
    s.add("algorithm",
          "ranksvm|ranknet|rankboost|adarank|coordinate_ascent|listnet|mart|"
          "lambdamart|random_forest",
          "ranksvm");
    s.app->add_option("--param", s.params, "hyperparameter name=value")
        ->take_all();
  }
  {
    SubOpts& s = subs[2];
    s.app = app.add_subcommand("predict", "write per-question predictions");
    s.body = clozerank::cmd_predict;
    add_common(s);
    s.add("input", "feature file");
    s.add("model", "model path");
    s.add("output", "predictions file (stdout when omitted)");
  }
  {
    SubOpts& s = subs[3];
    s.app = app.add_subcommand("evaluate", "accuracy of a model on a split");
    s.body = clozerank::cmd_evaluate;
    add_common(s);
    s.add("input", "feature file");
    s.add("model", "model path");
    s.add("split", "split name used in the report", "test");
    s.add("output", "per-question report file");
  }
  {
    SubOpts& s = subs[4];
    s.app = app.add_subcommand("compare",
                               "compare ranking algorithms (validation-tuned)");
    s.body = clozerank::cmd_compare;
    add_common(s);
    s.add("train", "training feature file");
    s.add("valid", "validation feature file");
    s.add("test", "test feature file");
    s.add("algorithms", "comma list (default: all nine)");
    s.add("output", "TSV output path");
  }
  {
    SubOpts& s = subs[5];
    s.app = app.add_subcommand("curve", "accuracy vs training-set size");
    s.body = clozerank::cmd_curve;
    add_common(s);
    s.add("train", "training feature file");
    s.add("valid", "validation feature file");
    s.add("test", "test feature file");
    s.add("sizes", "comma list of training sizes");
    s.add("repeats", "resamples per size", "10");
    s.add("algorithm", "ranking algorithm", "ranksvm");
    s.app->add_option("--param", s.params, "hyperparameter name=value")
        ->take_all();
    s.add("output", "TSV output path");
  }
  {
    SubOpts& s = subs[6];
    s.app = app.add_subcommand("ablate",
                               "component analysis: default, +Coref, -WMD, -FS");
    s.body = clozerank::cmd_ablate;
    add_common(s);
    add_feature_knobs(s);
    s.add("corpus", "corpus directory with training/validation/test");
    s.add("annotations", "annotation sidecar directory");
    s.add("embeddings", "embedding table");
    s.add("algorithm", "ranking algorithm", "ranksvm");
    s.app->add_option("--param", s.params, "hyperparameter name=value")
        ->take_all();
    s.add("threads", "parallel featurization degree", "0");
    s.add("output", "TSV output path");
  }
  {
    SubOpts& s = subs[7];
    s.app = app.add_subcommand("single-feature",
                               "train/evaluate one model per single feature");
    s.body = clozerank::cmd_single_feature;
    add_common(s);
    add_feature_knobs(s);
    s.add("corpus", "corpus directory with training/validation/test");
    s.add("annotations", "annotation sidecar directory");
    s.add("embeddings", "embedding table");
    s.add("study_features", "features to study (default FREQ,WA,NBOW,WMD,FS)");
    s.add("algorithm", "ranking algorithm", "ranksvm");
    s.app->add_option("--param", s.params, "hyperparameter name=value")
        ->take_all();
    s.add("threads", "parallel featurization degree", "0");
    s.add("output", "TSV output path");
  }
  {
    SubOpts& s = subs[8];
    s.app = app.add_subcommand("synth", "generate synthetic data");
    s.body = clozerank::cmd_synth;
    add_common(s);
    s.add("kind", "corpus (question files) or features (ranking files)",
          "corpus");
    s.add("output", "output directory");
    s.add("groups", "feature groups (kind=features)", "100");
    s.add("candidates", "candidates per group", "10");
    s.add("n_features", "feature count (kind=features)", "5");
    s.add("noise", "label feature noise stddev", "0");
    s.add("separability", "label feature scale", "1");
    s.add("label_feature", "feature 1 equals the relevance label", "on");
    s.add("questions", "training questions (kind=corpus)", "30");
    s.add("valid_questions", "validation questions", "10");
    s.add("test_questions", "test questions", "10");
    s.add("entities", "entities per document", "6");
    s.add("sentences", "sentences per document", "6");
    s.add("emb_dim", "embedding dimension", "8");
  }
  {
    SubOpts& s = subs[9];
    s.app = app.add_subcommand("stats", "exact corpus statistics");
    s.body = clozerank::cmd_stats;
    add_common(s);
    s.add("corpus", "corpus directory");
    s.add("output", "TSV output path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    for (const auto& s : subs)
      if (s.app->parsed()) {
        s.body(s.resolve(), std::cout);
        return 0;
      }
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const clozerank::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
