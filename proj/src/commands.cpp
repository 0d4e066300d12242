#include "clozerank/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <thread>

#include "clozerank/error.hpp"
#include "clozerank/eval.hpp"
#include "clozerank/features.hpp"
#include "clozerank/ltr/trainers.hpp"
#include "clozerank/synth.hpp"
#include "clozerank/text_util.hpp"

namespace clozerank {

namespace fs = std::filesystem;
using ltr::Algorithm;
using ltr::RankingDataset;
using ltr::RankingModel;

namespace {

FeatureConfig feature_config(const RunConfig& cfg) {
  FeatureConfig fc;
  if (cfg.has("features"))
    fc.set_enabled(FeatureConfig::parse_feature_list(cfg.str("features")));
  fc.wa_penalty = cfg.real("wa_penalty", fc.wa_penalty);
  fc.wa_window = (int)cfg.integer("wa_window", fc.wa_window);
  fc.pos_window = (int)cfg.integer("pos_window", fc.pos_window);
  fc.nbow_window = (int)cfg.integer("nbow_window", fc.nbow_window);
  fc.wmd_window = (int)cfg.integer("wmd_window", fc.wmd_window);
  return fc;
}

Algorithm algorithm_of(const RunConfig& cfg) {
  const std::string name = cfg.str("algorithm", "ranksvm");
  const auto a = ltr::algorithm_from_name(name);
  if (!a) raise(Errc::config_error, "unknown algorithm '" + name + "'");
  return *a;
}

std::uint64_t seed_of(const RunConfig& cfg) {
  return (std::uint64_t)cfg.integer("seed", 42);
}

int threads_of(const RunConfig& cfg) {
  const long t = cfg.integer("threads", 0);
  if (t > 0) return (int)t;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? (int)hw : 1;
}

std::string require(const RunConfig& cfg, const std::string& key,
                    const std::string& what) {
  const std::string v = cfg.str(key);
  if (v.empty()) raise(Errc::config_error, "missing --" + key + " (" + what + ")");
  return v;
}

/// Split subdirectories present under the corpus dir; the dir itself when
/// it directly holds question files.
std::vector<std::pair<std::string, std::string>> find_splits(
    const std::string& corpus_dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const char* name : {"training", "validation", "test"}) {
    const fs::path p = fs::path(corpus_dir) / name;
    if (fs::is_directory(p)) out.emplace_back(name, p.string());
  }
  if (out.empty() && fs::is_directory(corpus_dir))
    out.emplace_back(fs::path(corpus_dir).filename().string(), corpus_dir);
  if (out.empty())
    raise(Errc::config_error, corpus_dir + " is not a corpus directory");
  return out;
}

LoadedSplit load_split(const std::string& question_dir,
                       const std::string& annotations_dir) {
  LoadedSplit split;
  for (const auto& qpath : list_question_files(question_dir)) {
    split.questions.push_back(parse_question_file(qpath));
    if (!annotations_dir.empty()) {
      const fs::path apath =
          fs::path(annotations_dir) / (fs::path(qpath).stem().string() + ".anno");
      if (!fs::exists(apath))
        raise(Errc::config_error, "missing annotation file " + apath.string() +
                                      " for " + qpath);
      split.annotations.push_back(parse_annotations(apath.string()));
    }
  }
  return split;
}

/// Annotation directory for a split: mirrors the corpus layout.
std::string split_annotation_dir(const RunConfig& cfg, const std::string& split,
                                 const std::string& split_dir,
                                 const std::string& corpus_dir) {
  const std::string base = cfg.str("annotations");
  if (base.empty()) return "";
  if (split_dir == corpus_dir) return base;  // flat corpus
  return (fs::path(base) / split).string();
}

Corpus load_corpus(const RunConfig& cfg, bool need_annotations,
                   bool need_embeddings) {
  const std::string corpus_dir = require(cfg, "corpus", "corpus directory");
  if (need_annotations && cfg.str("annotations").empty())
    raise(Errc::config_error, "this command needs --annotations");

  Corpus corpus;
  for (const auto& [name, dir] : find_splits(corpus_dir)) {
    LoadedSplit split =
        load_split(dir, split_annotation_dir(cfg, name, dir, corpus_dir));
    if (name == "training")
      corpus.train = std::move(split);
    else if (name == "validation")
      corpus.valid = std::move(split);
    else if (name == "test")
      corpus.test = std::move(split);
    else
      corpus.train = std::move(split);
  }
  if (corpus.train.questions.empty())
    raise(Errc::config_error, corpus_dir + " has no training questions");
  if (need_embeddings) {
    corpus.embeddings =
        EmbeddingTable::load(require(cfg, "embeddings", "embedding table"));
  }
  return corpus;
}

void write_with_header(const std::string& path, const RunConfig& cfg,
                       const std::string& body) {
  write_file(path, cfg.echo_header() + body);
}

void emit_table(const StudyTable& table, const RunConfig& cfg,
                std::ostream& out) {
  out << table.to_text();
  const std::string path = cfg.str("output");
  if (!path.empty()) write_with_header(path, cfg, table.to_tsv());
}

std::string schema_manifest(const FeatureConfig& fc) {
  std::ostringstream out;
  out << "schema " << fc.schema_id() << "\n";
  const auto cols = fc.column_names();
  out << "columns " << cols.size() << "\n";
  for (size_t i = 0; i < cols.size(); ++i)
    out << (i + 1) << " " << cols[i] << "\n";
  return out.str();
}

}  // namespace

void cmd_featurize(const RunConfig& cfg, std::ostream& out) {
  const std::string corpus_dir = require(cfg, "corpus", "corpus directory");
  const std::string out_dir = require(cfg, "output", "output directory");
  const FeatureConfig fc = feature_config(cfg);
  const bool coref = cfg.flag("coref", false);

  if (fc.needs_annotations(coref) && cfg.str("annotations").empty())
    raise(Errc::config_error, "feature set " + fc.schema_id() +
                                  (coref ? " with coref" : "") +
                                  " requires --annotations");
  if (fc.needs_embeddings() && cfg.str("embeddings").empty())
    raise(Errc::config_error, "WMD requires --embeddings");

  std::optional<EmbeddingTable> emb;
  if (fc.needs_embeddings())
    emb = EmbeddingTable::load(cfg.str("embeddings"));

  fs::create_directories(out_dir);
  const int threads = threads_of(cfg);
  for (const auto& [name, dir] : find_splits(corpus_dir)) {
    const LoadedSplit split =
        load_split(dir, split_annotation_dir(cfg, name, dir, corpus_dir));
    const RankingDataset ds = featurize_split(
        split, fc, emb ? &*emb : nullptr, coref, threads);
    const fs::path base = fs::path(out_dir) / name;
    write_with_header(base.string() + ".features", cfg, ds.to_text());
    write_with_header(base.string() + ".schema", cfg, schema_manifest(fc));
    out << name << ": " << ds.groups.size() << " question groups, dim "
        << fc.dim() << " -> " << base.string() << ".features\n";
  }
}

namespace {

double training_objective(const RankingModel& m, const RankingDataset& data,
                          std::string* label) {
  switch (m.algorithm) {
    case Algorithm::ranksvm: {
      const RankingDataset std_data =
          ltr::standardize(data, m.feat_mean, m.feat_scale);
      *label = "hinge objective";
      return ltr::ranksvm_objective(std_data, m.weights,
                                    m.hyperparams.count("lambda")
                                        ? m.hyperparams.at("lambda")
                                        : 1e-4);
    }
    case Algorithm::ranknet: {
      const RankingDataset std_data =
          ltr::standardize(data, m.feat_mean, m.feat_scale);
      ltr::RankNetScorer s;
      if (m.has_hidden) {
        s.hidden = true;
        s.w1 = m.w1;
        s.b1 = m.b1;
        s.w2 = m.w2;
        s.b2 = m.b2;
      } else {
        s = ltr::RankNetScorer::linear(m.dim);
        s.w = m.weights;
      }
      *label = "pairwise logistic loss";
      return ltr::ranknet_loss(std_data, s);
    }
    case Algorithm::listnet: {
      const RankingDataset std_data =
          ltr::standardize(data, m.feat_mean, m.feat_scale);
      *label = "listwise cross entropy";
      return ltr::listnet_loss(std_data, m.weights);
    }
    default: {
      *label = "training error";
      return 1.0 - ltr::training_accuracy(m, data);
    }
  }
}

}  // namespace

namespace {

/// Feature file plus its schema manifest when one sits alongside.
RankingDataset read_features_with_schema(const std::string& input) {
  RankingDataset data = RankingDataset::read(input);
  const fs::path manifest = fs::path(input).replace_extension(".schema");
  if (fs::exists(manifest)) {
    for (const auto& line : split_char(read_file(manifest.string()), '\n')) {
      const auto words = split_whitespace(line);
      if (words.size() == 2 && words[0] == "schema") data.schema_id = words[1];
    }
  }
  return data;
}

void check_schema(const RankingModel& model, const RankingDataset& data) {
  if (!model.schema_id.empty() && !data.schema_id.empty() &&
      model.schema_id != data.schema_id)
    raise(Errc::schema_mismatch, "model was trained on schema " +
                                     model.schema_id + ", features carry " +
                                     data.schema_id);
}

}  // namespace

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const std::string input = require(cfg, "input", "training feature file");
  const std::string model_path = require(cfg, "model", "output model file");

  RankingDataset data = read_features_with_schema(input);
  data.validate();

  const Algorithm algorithm = algorithm_of(cfg);
  RankingModel model =
      ltr::train_model(data, algorithm, cfg.hyperparams(), seed_of(cfg));

  write_with_header(model_path, cfg, ltr::format_model(model));

  std::string label;
  const double objective = training_objective(model, data, &label);
  out << "trained " << ltr::algorithm_name(algorithm) << " on "
      << data.groups.size() << " groups (dim " << data.dim() << ")\n";
  out << "final " << label << ": " << format_g6(objective) << "\n";
  out << "training accuracy: " << format_g6(ltr::training_accuracy(model, data))
      << "\n";
  out << "model written to " << model_path << "\n";
}

void cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const RankingModel model =
      ltr::load_model(require(cfg, "model", "model file"));
  const RankingDataset data =
      read_features_with_schema(require(cfg, "input", "feature file"));
  check_schema(model, data);
  std::ostringstream body;
  for (const auto& g : data.groups)
    body << g.qid << "\t" << g.id_of(ltr::predict(model, g)) << "\n";
  const std::string path = cfg.str("output");
  if (path.empty())
    out << body.str();
  else {
    write_with_header(path, cfg, body.str());
    out << data.groups.size() << " predictions written to " << path << "\n";
  }
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const RankingModel model =
      ltr::load_model(require(cfg, "model", "model file"));
  const RankingDataset data =
      read_features_with_schema(require(cfg, "input", "feature file"));
  check_schema(model, data);
  const std::string split = cfg.str("split", "test");
  const EvalReport rep = evaluate(model, data, split);

  out << split << ": " << rep.correct << "/" << rep.total
      << " correct, accuracy " << format_g6(rep.accuracy()) << "\n";
  const std::string path = cfg.str("output");
  if (!path.empty()) {
    std::ostringstream body;
    body << "qid\tpredicted\tgold\tcorrect\n";
    for (const auto& r : rep.records)
      body << r.qid << "\t" << r.predicted << "\t" << r.gold << "\t"
           << (r.correct ? 1 : 0) << "\n";
    body << "# split " << split << " accuracy " << format_g6(rep.accuracy())
         << " (" << rep.correct << "/" << rep.total << ")\n";
    write_with_header(path, cfg, body.str());
    out << "report written to " << path << "\n";
  }
}

namespace {

struct SplitFiles {
  RankingDataset train, valid, test;
};

SplitFiles read_split_files(const RunConfig& cfg) {
  SplitFiles s;
  s.train = RankingDataset::read(require(cfg, "train", "training feature file"));
  s.valid = RankingDataset::read(require(cfg, "valid", "validation feature file"));
  s.test = RankingDataset::read(require(cfg, "test", "test feature file"));
  return s;
}

}  // namespace

void cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const SplitFiles files = read_split_files(cfg);
  std::vector<Algorithm> algorithms;
  const std::string list = cfg.str("algorithms");
  if (list.empty()) {
    algorithms = ltr::all_algorithms();
  } else {
    for (const auto& name : split_char(list, ',')) {
      const auto a = ltr::algorithm_from_name(trim(name));
      if (!a) raise(Errc::config_error, "unknown algorithm '" + trim(name) + "'");
      algorithms.push_back(*a);
    }
  }
  emit_table(algorithm_comparison(files.train, files.valid, files.test,
                                  algorithms, seed_of(cfg)),
             cfg, out);
}

void cmd_curve(const RunConfig& cfg, std::ostream& out) {
  const SplitFiles files = read_split_files(cfg);
  std::vector<int> sizes;
  for (const auto& s : split_char(require(cfg, "sizes", "sizes list"), ','))
    if (!trim(s).empty()) sizes.push_back((int)std::stol(trim(s)));
  if (sizes.empty()) raise(Errc::config_error, "empty --sizes list");
  const int repeats = (int)cfg.integer("repeats", 10);
  emit_table(learning_curve(files.train, files.valid, files.test, sizes,
                            repeats, algorithm_of(cfg), cfg.hyperparams(),
                            seed_of(cfg)),
             cfg, out);
}

void cmd_ablate(const RunConfig& cfg, std::ostream& out) {
  const Corpus corpus = load_corpus(cfg, true, true);
  emit_table(ablation_study(corpus, feature_config(cfg), algorithm_of(cfg),
                            cfg.hyperparams(), seed_of(cfg), threads_of(cfg)),
             cfg, out);
}

void cmd_single_feature(const RunConfig& cfg, std::ostream& out) {
  const FeatureConfig base = feature_config(cfg);
  std::vector<FeatureKind> kinds;
  if (cfg.has("study_features"))
    kinds = FeatureConfig::parse_feature_list(cfg.str("study_features"));
  else
    kinds = {FeatureKind::Freq, FeatureKind::WA, FeatureKind::Nbow,
             FeatureKind::Wmd, FeatureKind::FS};
  const bool needs_anno = std::any_of(kinds.begin(), kinds.end(), [](FeatureKind k) {
    return k == FeatureKind::Pos || k == FeatureKind::Dep || k == FeatureKind::FS;
  });
  const bool needs_emb =
      std::find(kinds.begin(), kinds.end(), FeatureKind::Wmd) != kinds.end();
  const Corpus corpus = load_corpus(cfg, needs_anno, needs_emb);
  emit_table(single_feature_study(corpus, kinds, base, algorithm_of(cfg),
                                  cfg.hyperparams(), seed_of(cfg),
                                  threads_of(cfg)),
             cfg, out);
}

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
  const std::string kind = cfg.str("kind", "corpus");
  const std::string out_dir = require(cfg, "output", "output directory");
  fs::create_directories(out_dir);

  if (kind == "features") {
    SynthFeatureSpec spec;
    spec.groups = (int)cfg.integer("groups", spec.groups);
    spec.candidates = (int)cfg.integer("candidates", spec.candidates);
    spec.features = (int)cfg.integer("n_features", spec.features);
    spec.noise = cfg.real("noise", spec.noise);
    spec.separability = cfg.real("separability", spec.separability);
    spec.label_feature = cfg.flag("label_feature", spec.label_feature);
    spec.seed = seed_of(cfg);

    // Same generator, three seeds, three splits.
    const char* names[] = {"training", "validation", "test"};
    for (int i = 0; i < 3; ++i) {
      SynthFeatureSpec s = spec;
      s.seed = spec.seed + (std::uint64_t)i * 1000003ULL;
      if (i > 0) s.groups = std::max(1, spec.groups / 2);
      const auto ds = synth_features(s);
      const std::string path =
          (fs::path(out_dir) / (std::string(names[i]) + ".features")).string();
      write_with_header(path, cfg, ds.to_text());
      out << names[i] << ": " << ds.groups.size() << " groups -> " << path << "\n";
    }
    return;
  }
  if (kind == "corpus") {
    SynthCorpusSpec spec;
    spec.train_questions = (int)cfg.integer("questions", spec.train_questions);
    spec.valid_questions =
        (int)cfg.integer("valid_questions", spec.valid_questions);
    spec.test_questions = (int)cfg.integer("test_questions", spec.test_questions);
    spec.entities = (int)cfg.integer("entities", spec.entities);
    spec.sentences = (int)cfg.integer("sentences", spec.sentences);
    spec.embedding_dim = (int)cfg.integer("emb_dim", spec.embedding_dim);
    spec.seed = seed_of(cfg);
    write_synth_corpus(spec, out_dir);
    out << "synthetic corpus written under " << out_dir
        << " (training/validation/test + annotations + embeddings.txt)\n";
    return;
  }
  raise(Errc::config_error, "synth kind must be 'features' or 'corpus'");
}

void cmd_stats(const RunConfig& cfg, std::ostream& out) {
  const std::string corpus_dir = require(cfg, "corpus", "corpus directory");
  StudyTable table;
  table.title = "Corpus statistics";
  table.columns = {"Split", "documents", "queries", "max_entities",
                   "avg_entities", "avg_tokens"};
  for (const auto& [name, dir] : find_splits(corpus_dir)) {
    const CorpusStats st = corpus_stats(list_question_files(dir));
    table.rows.push_back({name, std::to_string(st.documents),
                          std::to_string(st.queries),
                          std::to_string(st.max_entities),
                          format_g6(st.avg_entities()),
                          format_g6(st.avg_tokens())});
  }
  emit_table(table, cfg, out);
}

}  // namespace clozerank
