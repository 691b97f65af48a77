#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "retain/hash.hpp"
#include "retain/json.hpp"
#include "retain/random.hpp"
#include "retain/survival/concordance.hpp"
#include "retain/survival/cox.hpp"
#include "retain/survival/forest.hpp"
#include "retain/survival/nncox.hpp"
#include "retain/survival/records.hpp"

namespace retain {

enum class ModelKind { cox, rsf, nncox };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::cox: return "cox";
    case ModelKind::rsf: return "rsf";
    case ModelKind::nncox: return "nncox";
  }
  return "";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view text) {
  if (text == "cox") return ModelKind::cox;
  if (text == "rsf") return ModelKind::rsf;
  if (text == "nncox") return ModelKind::nncox;
  return std::nullopt;
}

struct ModelOptions {
  std::vector<std::string> features;  // empty = every column
  double train_fraction = 0.7;
  int feature_window_days = kDefaultFeatureWindowDays;
  CoxOptions cox;
  ForestOptions forest;
  NnCoxOptions nncox;
};

inline constexpr std::size_t kMinimumRecords = 10;
inline constexpr int kModelFormatVersion = 1;

struct CoxParameters {
  Eigen::VectorXd beta;
  StepFunction baseline_cumulative_hazard;
};

struct FittedModel {
  std::string model_id;
  ModelKind kind = ModelKind::cox;
  std::vector<std::string> feature_names;
  std::uint64_t seed = 0;
  ModelOptions options;
  std::optional<double> c_index;
  double train_fraction = 0.7;
  bool converged = true;
  int iterations = 0;
  int train_size = 0;
  int holdout_size = 0;
  std::variant<CoxParameters, SurvivalForest, NnCoxNetwork> parameters;
};

struct RiskScore {
  std::string contributor_id;
  double score = 0.0;
  int rank = 1;
};

namespace detail {

inline Eigen::MatrixXd design_matrix(const SurvivalData& data, std::span<const std::size_t> rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.feature_names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& cov = data.records[rows[r]].covariates;
    for (std::size_t j = 0; j < cov.size(); ++j) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = cov[j];
  }
  return x;
}

inline CoxData cox_data(const SurvivalData& data, std::span<const std::size_t> rows) {
  CoxData d;
  d.x = design_matrix(data, rows);
  d.time.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    d.time[static_cast<Eigen::Index>(r)] = static_cast<double>(data.records[rows[r]].duration_days);
    d.event.push_back(data.records[rows[r]].event);
  }
  return d;
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace detail

// Raw predictor per record: linear or network predictor, or forest mortality.
inline std::vector<double> score_records(const FittedModel& model, const SurvivalData& aligned) {
  const auto rows = detail::all_rows(aligned.records.size());
  const Eigen::MatrixXd x = detail::design_matrix(aligned, rows);
  std::vector<double> scores(aligned.records.size());
  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, CoxParameters>) {
          const Eigen::VectorXd eta = x * params.beta;
          for (Eigen::Index i = 0; i < eta.size(); ++i) scores[static_cast<std::size_t>(i)] = eta[i];
        } else if constexpr (std::is_same_v<T, NnCoxNetwork>) {
          const Eigen::VectorXd eta = params.predict(x);
          for (Eigen::Index i = 0; i < eta.size(); ++i) scores[static_cast<std::size_t>(i)] = eta[i];
        } else {
          for (Eigen::Index i = 0; i < x.rows(); ++i) scores[static_cast<std::size_t>(i)] = params.risk_score(x.row(i));
        }
      },
      model.parameters);
  return scores;
}

inline std::optional<double> concordance_on(const FittedModel& model, const SurvivalData& aligned) {
  const auto scores = score_records(model, aligned);
  std::vector<double> duration;
  std::vector<int> event;
  for (const auto& r : aligned.records) {
    duration.push_back(static_cast<double>(r.duration_days));
    event.push_back(r.event);
  }
  return concordance_index(scores, duration, event);
}

// Fits one of the three attrition models on a seeded train split and scores
// Harrell's C on the holdout.
inline FittedModel fit_model(const SurvivalData& input, ModelKind kind, const ModelOptions& options,
                             std::uint64_t split_seed) {
  const SurvivalData data =
      options.features.empty() ? input : select_features(input, std::span<const std::string>(options.features));
  if (data.feature_names.empty()) fail(ErrorKind::validation, "at least one feature is required");
  const auto events = std::count_if(data.records.begin(), data.records.end(), [](const auto& r) { return r.event != 0; });
  if (data.records.size() < kMinimumRecords || events < 1) {
    fail(ErrorKind::insufficient, "insufficient records: need at least " + std::to_string(kMinimumRecords) +
                                      " records with at least one event, got " + std::to_string(data.records.size()) +
                                      " records and " + std::to_string(events) + " events");
  }
  if (!(options.train_fraction > 0.0 && options.train_fraction <= 1.0)) {
    fail(ErrorKind::validation, "train_fraction must be in (0, 1]");
  }
  if (kind != ModelKind::rsf) {
    for (std::size_t j = 0; j < data.feature_names.size(); ++j) {
      const double first = data.records.front().covariates[j];
      const bool constant = std::all_of(data.records.begin(), data.records.end(),
                                        [&](const auto& r) { return r.covariates[j] == first; });
      if (constant) fail(ErrorKind::validation, "zero-variance covariate '" + data.feature_names[j] + "'");
    }
  }

  auto order = detail::all_rows(data.records.size());
  Rng split_rng(derive_seed(split_seed, 0));
  split_rng.shuffle(order);
  const auto n = order.size();
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(options.train_fraction * static_cast<double>(n))), 1, n);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> holdout(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(holdout.begin(), holdout.end());
  if (std::none_of(train.begin(), train.end(), [&](std::size_t i) { return data.records[i].event != 0; })) {
    fail(ErrorKind::insufficient, "insufficient records: training split has no events");
  }

  FittedModel model;
  model.kind = kind;
  model.feature_names = data.feature_names;
  model.seed = split_seed;
  model.options = options;
  model.options.features = data.feature_names;
  model.train_fraction = options.train_fraction;
  model.train_size = static_cast<int>(train.size());
  model.holdout_size = static_cast<int>(holdout.size());

  const CoxData train_data = detail::cox_data(data, train);
  switch (kind) {
    case ModelKind::cox: {
      auto fit = fit_cox(train_data, options.cox);
      model.converged = fit.converged && fit.beta.allFinite();
      model.iterations = fit.iterations;
      model.parameters = CoxParameters{fit.beta, fit.baseline_cumulative_hazard};
      break;
    }
    case ModelKind::rsf: {
      model.parameters = grow_forest(train_data.x, train_data.time, train_data.event, options.forest,
                                     derive_seed(split_seed, 1));
      model.iterations = options.forest.trees;
      break;
    }
    case ModelKind::nncox: {
      auto fit = fit_nncox(train_data, options.nncox, derive_seed(split_seed, 2));
      model.converged = fit.epochs == options.nncox.epochs && std::isfinite(fit.loglik);
      model.iterations = fit.epochs;
      model.parameters = fit.network;
      break;
    }
  }

  if (!holdout.empty()) {
    SurvivalData held;
    held.feature_names = data.feature_names;
    for (auto i : holdout) held.records.push_back(data.records[i]);
    model.c_index = concordance_on(model, held);
  }

  Json fingerprint;
  fingerprint["kind"] = to_string(kind);
  fingerprint["seed"] = split_seed;
  fingerprint["features"] = data.feature_names;
  fingerprint["train_fraction"] = options.train_fraction;
  fingerprint["window"] = options.feature_window_days;
  fingerprint["trees"] = options.forest.trees;
  fingerprint["hidden"] = options.nncox.hidden_units;
  fingerprint["epochs"] = options.nncox.epochs;
  Json rows = Json::array();
  for (const auto& r : data.records) rows.push_back(Json{r.contributor_id, r.duration_days, r.event, r.covariates});
  fingerprint["records"] = std::move(rows);
  model.model_id = stable_id(std::string(to_string(kind)) + "-", fingerprint.dump());
  return model;
}

// Scores and ranks records (1 = highest risk; ties by contributor_id).
inline std::vector<RiskScore> predict_risk(const FittedModel& model, const SurvivalData& data) {
  const SurvivalData aligned = select_features(data, std::span<const std::string>(model.feature_names));
  const auto scores = score_records(model, aligned);
  std::vector<RiskScore> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({aligned.records[i].contributor_id, scores[i], 0});
  std::sort(out.begin(), out.end(), [](const RiskScore& a, const RiskScore& b) {
    return a.score != b.score ? a.score > b.score : a.contributor_id < b.contributor_id;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

// ---- JSON ---------------------------------------------------------------

namespace detail {

inline Json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) = vector_from_json(j[static_cast<std::size_t>(r)]).transpose();
  return m;
}

}  // namespace detail

inline Json options_json(const ModelOptions& o) {
  Json j;
  j["features"] = o.features;
  j["train_fraction"] = o.train_fraction;
  j["feature_window_days"] = o.feature_window_days;
  j["cox"] = Json{{"max_iterations", o.cox.max_iterations}, {"score_tolerance", o.cox.score_tolerance}};
  j["rsf"] = Json{{"trees", o.forest.trees},
                  {"min_node_size", o.forest.min_node_size},
                  {"mtry", o.forest.mtry},
                  {"bootstrap", o.forest.bootstrap},
                  {"max_split_candidates", o.forest.max_split_candidates}};
  j["nncox"] = Json{{"hidden_units", o.nncox.hidden_units},
                    {"learning_rate", o.nncox.learning_rate},
                    {"epochs", o.nncox.epochs},
                    {"init_range", o.nncox.init_range}};
  return j;
}

// Missing keys keep their defaults so partial request bodies work.
inline ModelOptions options_from_json(const Json& j) {
  ModelOptions o;
  if (j.contains("features")) o.features = j["features"].get<std::vector<std::string>>();
  o.train_fraction = j.value("train_fraction", o.train_fraction);
  o.feature_window_days = j.value("feature_window_days", o.feature_window_days);
  if (j.contains("cox")) {
    o.cox.max_iterations = j["cox"].value("max_iterations", o.cox.max_iterations);
    o.cox.score_tolerance = j["cox"].value("score_tolerance", o.cox.score_tolerance);
  }
  if (j.contains("rsf")) {
    const auto& r = j["rsf"];
    o.forest.trees = r.value("trees", o.forest.trees);
    o.forest.min_node_size = r.value("min_node_size", o.forest.min_node_size);
    o.forest.mtry = r.value("mtry", o.forest.mtry);
    o.forest.bootstrap = r.value("bootstrap", o.forest.bootstrap);
    o.forest.max_split_candidates = r.value("max_split_candidates", o.forest.max_split_candidates);
  }
  if (j.contains("nncox")) {
    const auto& r = j["nncox"];
    o.nncox.hidden_units = r.value("hidden_units", o.nncox.hidden_units);
    o.nncox.learning_rate = r.value("learning_rate", o.nncox.learning_rate);
    o.nncox.epochs = r.value("epochs", o.nncox.epochs);
    o.nncox.init_range = r.value("init_range", o.nncox.init_range);
  }
  return o;
}

inline Json to_json(const FittedModel& m) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["model_id"] = m.model_id;
  j["kind"] = to_string(m.kind);
  j["feature_names"] = m.feature_names;
  j["seed"] = m.seed;
  j["options"] = options_json(m.options);
  j["c_index"] = m.c_index ? Json(*m.c_index) : Json(nullptr);
  j["train_fraction"] = m.train_fraction;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["train_size"] = m.train_size;
  j["holdout_size"] = m.holdout_size;
  Json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CoxParameters>) {
          params["beta"] = detail::vector_json(p.beta);
          params["baseline_cumulative_hazard"] = to_json(p.baseline_cumulative_hazard);
        } else if constexpr (std::is_same_v<T, NnCoxNetwork>) {
          params["hidden_weights"] = detail::matrix_json(p.hidden_weights);
          params["hidden_bias"] = detail::vector_json(p.hidden_bias);
          params["output_weights"] = detail::vector_json(p.output_weights);
          params["input_mean"] = detail::vector_json(p.input_mean);
          params["input_scale"] = detail::vector_json(p.input_scale);
        } else {
          params["event_times"] = p.event_times;
          Json trees = Json::array();
          for (const auto& tree : p.trees) {
            Json nodes = Json::array();
            for (const auto& n : tree.nodes) {
              if (n.is_leaf()) {
                nodes.push_back(Json{{"leaf", to_json(n.cumulative_hazard)}});
              } else {
                nodes.push_back(
                    Json{{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
              }
            }
            trees.push_back(std::move(nodes));
          }
          params["trees"] = std::move(trees);
        }
      },
      m.parameters);
  j["parameters"] = std::move(params);
  return j;
}

inline FittedModel model_from_json(const Json& j) {
  if (j.value("format_version", 0) != kModelFormatVersion) {
    fail(ErrorKind::validation, "unsupported model format_version");
  }
  FittedModel m;
  m.model_id = j.at("model_id").get<std::string>();
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  if (!kind) fail(ErrorKind::validation, "unknown model kind");
  m.kind = *kind;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.options = options_from_json(j.at("options"));
  if (!j.at("c_index").is_null()) m.c_index = j["c_index"].get<double>();
  m.train_fraction = j.at("train_fraction").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<int>();
  m.train_size = j.at("train_size").get<int>();
  m.holdout_size = j.at("holdout_size").get<int>();
  const auto& p = j.at("parameters");
  const auto features = static_cast<Eigen::Index>(m.feature_names.size());
  switch (m.kind) {
    case ModelKind::cox:
      m.parameters = CoxParameters{detail::vector_from_json(p.at("beta")),
                                   step_function_from_json(p.at("baseline_cumulative_hazard"))};
      break;
    case ModelKind::nncox: {
      NnCoxNetwork net;
      net.hidden_weights = detail::matrix_from_json(p.at("hidden_weights"), features);
      net.hidden_bias = detail::vector_from_json(p.at("hidden_bias"));
      net.output_weights = detail::vector_from_json(p.at("output_weights"));
      net.input_mean = detail::vector_from_json(p.at("input_mean"));
      net.input_scale = detail::vector_from_json(p.at("input_scale"));
      m.parameters = std::move(net);
      break;
    }
    case ModelKind::rsf: {
      SurvivalForest forest;
      forest.event_times = p.at("event_times").get<std::vector<double>>();
      for (const auto& tj : p.at("trees")) {
        SurvivalTree tree;
        for (const auto& nj : tj) {
          TreeNode n;
          if (nj.contains("leaf")) {
            n.cumulative_hazard = step_function_from_json(nj["leaf"]);
          } else {
            n.feature = nj.at("feature").get<int>();
            n.threshold = nj.at("threshold").get<double>();
            n.left = nj.at("left").get<int>();
            n.right = nj.at("right").get<int>();
          }
          tree.nodes.push_back(std::move(n));
        }
        forest.trees.push_back(std::move(tree));
      }
      m.parameters = std::move(forest);
      break;
    }
  }
  return m;
}

inline Json to_json(std::span<const RiskScore> scores) {
  Json j = Json::array();
  for (const auto& s : scores) {
    Json sj;
    sj["contributor_id"] = s.contributor_id;
    sj["score"] = s.score;
    sj["rank"] = s.rank;
    j.push_back(std::move(sj));
  }
  return j;
}

// Summary without the parameter payload.
inline Json model_summary_json(const FittedModel& m) {
  Json j = to_json(m);
  j.erase("parameters");
  return j;
}

}  // namespace retain
