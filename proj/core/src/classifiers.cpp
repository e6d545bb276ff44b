#include "ovo/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ovo/parallel.hpp"

namespace ovo {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) {
    if (z > 0.0) {
        return z + std::log1p(std::exp(-z));
    }
    return std::log1p(std::exp(z));
}

struct LogisticProblem {
    const std::vector<std::vector<double>>* x;
    const std::vector<double>* y; // targets in {0,1}
    double l2;
};

double logistic_loss(const LogisticProblem& prob, const std::vector<double>& w, double b) {
    double loss = 0.0;
    for (std::size_t n = 0; n < prob.x->size(); ++n) {
        const auto& xi = (*prob.x)[n];
        double z = b;
        for (std::size_t d = 0; d < xi.size(); ++d) {
            z += w[d] * xi[d];
        }
        loss += softplus(z) - (*prob.y)[n] * z;
    }
    double wsq = 0.0;
    for (double v : w) wsq += v * v;
    return loss + 0.5 * prob.l2 * wsq;
}

void logistic_gradient(const LogisticProblem& prob, const std::vector<double>& w, double b,
                       std::vector<double>& gw, double& gb) {
    std::fill(gw.begin(), gw.end(), 0.0);
    gb = 0.0;
    for (std::size_t n = 0; n < prob.x->size(); ++n) {
        const auto& xi = (*prob.x)[n];
        double z = b;
        for (std::size_t d = 0; d < xi.size(); ++d) {
            z += w[d] * xi[d];
        }
        const double e = sigmoid(z) - (*prob.y)[n];
        for (std::size_t d = 0; d < xi.size(); ++d) {
            gw[d] += e * xi[d];
        }
        gb += e;
    }
    for (std::size_t d = 0; d < gw.size(); ++d) {
        gw[d] += prob.l2 * w[d];
    }
}

// Full-batch gradient descent; the step is halved whenever it would
// increase the loss, so the recorded trace is non-increasing.
void fit_logistic(const LogisticProblem& prob, std::vector<double>& w, double& b,
                  double learning_rate, std::size_t epochs, TrainTrace* trace) {
    const double inv_n = 1.0 / static_cast<double>(std::max<std::size_t>(prob.x->size(), 1));
    double lr = learning_rate;
    double loss = logistic_loss(prob, w, b);
    std::vector<double> gw(w.size(), 0.0);
    std::vector<double> w_new(w.size(), 0.0);
    double gb = 0.0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        logistic_gradient(prob, w, b, gw, gb);
        bool accepted = false;
        double b_new = b, loss_new = loss;
        for (int halving = 0; halving <= 30; ++halving) {
            for (std::size_t d = 0; d < w.size(); ++d) {
                w_new[d] = w[d] - lr * inv_n * gw[d];
            }
            b_new = b - lr * inv_n * gb;
            loss_new = logistic_loss(prob, w_new, b_new);
            if (std::isfinite(loss_new) && loss_new <= loss) {
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if (accepted) {
            w = w_new;
            b = b_new;
            loss = loss_new;
        }
        if (trace) {
            trace->losses.push_back(loss);
        }
    }
}

std::vector<std::vector<double>> class_subset(const LabeledDataset& ds, std::size_t cls) {
    std::vector<std::vector<double>> out;
    for (std::size_t n = 0; n < ds.size(); ++n) {
        if (ds.labels[n].count(cls)) {
            out.push_back(ds.features[n]);
        }
    }
    return out;
}

void require_nonempty_classes(const LabeledDataset& ds) {
    for (std::size_t c = 0; c < ds.class_set.size(); ++c) {
        if (ds.counts[c] == 0) {
            throw MissingClassError("class '" + ds.class_set.label(c) + "' has no samples");
        }
    }
}

} // namespace

double BinaryLinearClassifier::score(const std::vector<double>& x) const {
    if (x.size() != weights.size()) {
        throw ShapeError("feature dimension mismatch: got " + std::to_string(x.size()) +
                         ", expected " + std::to_string(weights.size()));
    }
    double z = bias;
    for (std::size_t d = 0; d < x.size(); ++d) {
        z += weights[d] * x[d];
    }
    return sigmoid(z);
}

double MultiOutputModel::node(std::size_t i, const std::vector<double>& x) const {
    if (x.size() != weights.at(i).size()) {
        throw ShapeError("feature dimension mismatch");
    }
    double z = biases[i];
    for (std::size_t d = 0; d < x.size(); ++d) {
        z += weights[i][d] * x[d];
    }
    return sigmoid(z);
}

std::vector<double> MultiOutputModel::operator()(const std::vector<double>& x) const {
    std::vector<double> out(num_classes());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = node(i, x);
    }
    return out;
}

const BinaryLinearClassifier& ClassifierSuite::scorer(std::size_t i, std::size_t j) const {
    for (const auto& c : pair_scorers) {
        if (c.class_i == i && c.class_j == j) {
            return c;
        }
    }
    throw ShapeError("no scorer for pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
}

BinaryLinearClassifier train_binary_logistic(const std::vector<std::vector<double>>& data_i,
                                             const std::vector<std::vector<double>>& data_j,
                                             const TrainOptions& opts, TrainTrace* trace) {
    if (data_i.empty() || data_j.empty()) {
        throw MissingClassError("both classes need at least one sample");
    }
    const std::size_t d = data_i.front().size();
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (const auto& f : data_i) {
        if (f.size() != d) throw ShapeError("feature dimension mismatch in class i");
        x.push_back(f);
        y.push_back(1.0);
    }
    for (const auto& f : data_j) {
        if (f.size() != d) throw ShapeError("feature dimension mismatch in class j");
        x.push_back(f);
        y.push_back(0.0);
    }
    BinaryLinearClassifier clf;
    clf.weights.assign(d, 0.0);
    LogisticProblem prob{&x, &y, opts.l2};
    fit_logistic(prob, clf.weights, clf.bias, opts.learning_rate, opts.epochs, trace);
    return clf;
}

ClassifierSuite train_pairwise_suite(const LabeledDataset& ds, const TrainOptions& opts,
                                     std::size_t threads) {
    require_nonempty_classes(ds);
    const std::size_t k = ds.class_set.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    ClassifierSuite suite{ds.class_set, {}, SuiteProvenance::pairwise_scratch};
    suite.pair_scorers.resize(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t idx) {
        auto [i, j] = pairs[idx];
        auto clf = train_binary_logistic(class_subset(ds, i), class_subset(ds, j), opts);
        clf.class_i = i;
        clf.class_j = j;
        suite.pair_scorers[idx] = std::move(clf);
    });
    return suite;
}

MultiOutputModel train_multioutput(const LabeledDataset& ds, const TrainOptions& opts) {
    require_nonempty_classes(ds);
    const std::size_t k = ds.class_set.size();
    const std::size_t d = ds.dim();
    MultiOutputModel model;
    model.weights.assign(k, std::vector<double>(d, 0.0));
    model.biases.assign(k, 0.0);
    std::vector<double> y(ds.size(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t n = 0; n < ds.size(); ++n) {
            y[n] = ds.labels[n].count(c) ? 1.0 : 0.0;
        }
        LogisticProblem prob{&ds.features, &y, opts.l2};
        fit_logistic(prob, model.weights[c], model.biases[c], opts.learning_rate, opts.epochs,
                     nullptr);
    }
    return model;
}

ClassifierSuite refine_ova_to_ovo(const MultiOutputModel& model, const LabeledDataset& ds,
                                  const TrainOptions& opts) {
    require_nonempty_classes(ds);
    const std::size_t k = ds.class_set.size();
    if (model.num_classes() != k) {
        throw ShapeError("model class count does not match dataset");
    }
    if (!model.weights.empty() && model.weights.front().size() != ds.dim()) {
        throw ShapeError("model feature dimension does not match dataset");
    }

    // Per class j: fine-tune every node i != j on S_j with target 0;
    // node j stays untouched.
    std::vector<MultiOutputModel> refined(k, model);
    for (std::size_t j = 0; j < k; ++j) {
        auto s_j = class_subset(ds, j);
        std::vector<double> zeros(s_j.size(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            if (i == j) continue;
            LogisticProblem prob{&s_j, &zeros, opts.l2};
            fit_logistic(prob, refined[j].weights[i], refined[j].biases[i], opts.learning_rate,
                         opts.epochs, nullptr);
        }
    }

    ClassifierSuite suite{ds.class_set, {}, SuiteProvenance::ova_refined};
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            BinaryLinearClassifier clf;
            clf.weights = refined[j].weights[i];
            clf.bias = refined[j].biases[i];
            clf.class_i = i;
            clf.class_j = j;
            suite.pair_scorers.push_back(std::move(clf));
        }
    }
    return suite;
}

PairwiseScoreMatrix score_sample(const ClassifierSuite& suite, const std::vector<double>& x) {
    PairwiseScoreMatrix m(suite.classes);
    for (const auto& clf : suite.pair_scorers) {
        m.set_raw(clf.class_i, clf.class_j, clf.score(x));
    }
    return m;
}

ExternalScores load_external_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open score file: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    if (!doc.contains("classes") || !doc.contains("samples")) {
        throw ParseError("score file needs 'classes' and 'samples'");
    }
    ClassSet classes(doc["classes"].get<std::vector<std::string>>());
    const std::size_t k = classes.size();

    ExternalScores out{classes, {}};
    std::size_t record = 0;
    for (const auto& sample : doc["samples"]) {
        std::vector<std::vector<double>> grid(k, std::vector<double>(k, 0.5));
        std::vector<std::vector<bool>> given(k, std::vector<bool>(k, false));
        if (!sample.contains("scores")) {
            throw ValidationError("sample missing 'scores'", record);
        }
        for (const auto& [key, value] : sample["scores"].items()) {
            const auto comma = key.find(',');
            if (comma == std::string::npos) {
                throw ValidationError("bad pair key '" + key + "'", record);
            }
            std::size_t i = 0, j = 0;
            try {
                i = std::stoul(key.substr(0, comma));
                j = std::stoul(key.substr(comma + 1));
            } catch (const std::exception&) {
                throw ValidationError("bad pair key '" + key + "'", record);
            }
            if (i >= k || j >= k || i == j) {
                throw ValidationError("pair key '" + key + "' out of range", record);
            }
            grid[i][j] = value.get<double>();
            given[i][j] = true;
        }

        PairwiseScoreMatrix m(classes);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                double s;
                if (given[i][j] && given[j][i]) {
                    const double gap = grid[i][j] + grid[j][i] - 1.0;
                    if (std::abs(gap) > 1e-6) {
                        throw ValidationError("complement convention violated at pair (" +
                                                  std::to_string(i) + "," + std::to_string(j) +
                                                  ")",
                                              record);
                    }
                    s = 0.5 * (grid[i][j] + (1.0 - grid[j][i]));
                } else if (given[i][j]) {
                    s = grid[i][j];
                } else if (given[j][i]) {
                    s = 1.0 - grid[j][i];
                } else {
                    throw ValidationError("missing score for pair (" + std::to_string(i) + "," +
                                              std::to_string(j) + ")",
                                          record);
                }
                if (!std::isfinite(s) || s < -1e-9 || s > 1.0 + 1e-9) {
                    throw ValidationError("score out of [0,1] at pair (" + std::to_string(i) +
                                              "," + std::to_string(j) + ")",
                                          record);
                }
                m.set_raw(i, j, std::clamp(s, 0.0, 1.0));
            }
        }

        ExternalScoreRecord rec{sample.value("id", std::to_string(record)), m, std::nullopt};
        if (sample.contains("label") && !sample["label"].is_null()) {
            std::set<std::size_t> truth;
            if (sample["label"].is_array()) {
                for (const auto& l : sample["label"]) {
                    truth.insert(classes.index_of(l.get<std::string>()));
                }
            } else {
                truth.insert(classes.index_of(sample["label"].get<std::string>()));
            }
            rec.truth = std::move(truth);
        }
        out.records.push_back(std::move(rec));
        ++record;
    }
    return out;
}

} // namespace ovo
