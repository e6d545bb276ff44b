#include "ovo/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ovo::io {

namespace fs = std::filesystem;
using nlohmann::json;

void atomic_write(const std::string& path, const std::string& content) {
    const fs::path target(path);
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    const fs::path tmp = dir / (target.filename().string() + ".tmp." +
                                std::to_string(static_cast<unsigned long>(::getpid())));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ParseError("cannot open for writing: " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ParseError("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

json doc_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open: " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    return doc;
}

std::string pair_key(std::size_t i, std::size_t j) {
    return std::to_string(i) + "," + std::to_string(j);
}

} // namespace

LabeledDataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty dataset file: " + path);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    std::vector<std::size_t> feature_cols;
    std::ptrdiff_t label_col = -1;
    bool multi_label = false;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "label") {
            label_col = static_cast<std::ptrdiff_t>(c);
        } else if (header[c] == "labels") {
            label_col = static_cast<std::ptrdiff_t>(c);
            multi_label = true;
        } else if (header[c].size() >= 2 && header[c][0] == 'f') {
            feature_cols.push_back(c);
        } else {
            throw ParseError("unrecognized column '" + header[c] + "' in " + path);
        }
    }
    if (label_col < 0) {
        throw ParseError("dataset needs a 'label' or 'labels' column: " + path);
    }
    if (feature_cols.empty()) {
        throw ParseError("dataset needs feature columns f0..: " + path);
    }

    std::vector<std::vector<double>> features;
    std::vector<std::vector<std::string>> raw_labels;
    std::vector<std::string> names; // first-appearance order
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(lineno) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        }
        std::vector<double> x;
        for (std::size_t c : feature_cols) {
            try {
                x.push_back(std::stod(fields[c]));
            } catch (const std::exception&) {
                throw ParseError("bad number '" + fields[c] + "' at row " +
                                 std::to_string(lineno));
            }
        }
        features.push_back(std::move(x));
        std::vector<std::string> ls;
        if (multi_label) {
            ls = split(fields[static_cast<std::size_t>(label_col)], ';');
        } else {
            ls.push_back(fields[static_cast<std::size_t>(label_col)]);
        }
        for (const auto& l : ls) {
            if (std::find(names.begin(), names.end(), l) == names.end()) {
                names.push_back(l);
            }
        }
        raw_labels.push_back(std::move(ls));
    }

    ClassSet classes(names);
    std::vector<std::set<std::size_t>> labels;
    for (const auto& ls : raw_labels) {
        std::set<std::size_t> s;
        for (const auto& l : ls) {
            s.insert(classes.index_of(l));
        }
        labels.push_back(std::move(s));
    }
    return LabeledDataset(std::move(classes), std::move(features), std::move(labels));
}

void save_suite(const std::string& path, const ClassifierSuite& suite) {
    json doc;
    doc["classes"] = suite.classes.labels();
    switch (suite.provenance) {
        case SuiteProvenance::pairwise_scratch: doc["provenance"] = "pairwise_scratch"; break;
        case SuiteProvenance::ova_refined: doc["provenance"] = "ova_refined"; break;
        case SuiteProvenance::external: doc["provenance"] = "external"; break;
    }
    json pairs = json::array();
    for (const auto& clf : suite.pair_scorers) {
        pairs.push_back({{"i", clf.class_i},
                         {"j", clf.class_j},
                         {"weights", clf.weights},
                         {"bias", clf.bias}});
    }
    doc["pairs"] = std::move(pairs);
    atomic_write(path, doc.dump(2) + "\n");
}

ClassifierSuite load_suite(const std::string& path) {
    json doc = doc_from_file(path);
    ClassifierSuite suite{ClassSet(doc.at("classes").get<std::vector<std::string>>()),
                          {},
                          SuiteProvenance::pairwise_scratch};
    const std::string prov = doc.value("provenance", "pairwise_scratch");
    if (prov == "ova_refined") suite.provenance = SuiteProvenance::ova_refined;
    if (prov == "external") suite.provenance = SuiteProvenance::external;
    for (const auto& p : doc.at("pairs")) {
        BinaryLinearClassifier clf;
        clf.class_i = p.at("i").get<std::size_t>();
        clf.class_j = p.at("j").get<std::size_t>();
        clf.weights = p.at("weights").get<std::vector<double>>();
        clf.bias = p.at("bias").get<double>();
        suite.pair_scorers.push_back(std::move(clf));
    }
    const std::size_t k = suite.classes.size();
    if (suite.pair_scorers.size() != k * (k - 1) / 2) {
        throw ParseError("suite has " + std::to_string(suite.pair_scorers.size()) +
                         " scorers, expected " + std::to_string(k * (k - 1) / 2));
    }
    return suite;
}

void save_model(const std::string& path, const ClassSet& classes, const MultiOutputModel& model) {
    json doc;
    doc["classes"] = classes.labels();
    doc["weights"] = model.weights;
    doc["biases"] = model.biases;
    atomic_write(path, doc.dump(2) + "\n");
}

std::pair<ClassSet, MultiOutputModel> load_model(const std::string& path) {
    json doc = doc_from_file(path);
    ClassSet classes(doc.at("classes").get<std::vector<std::string>>());
    MultiOutputModel model;
    model.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
    model.biases = doc.at("biases").get<std::vector<double>>();
    if (model.weights.size() != classes.size() || model.biases.size() != classes.size()) {
        throw ParseError("model shape does not match class count in " + path);
    }
    return {std::move(classes), std::move(model)};
}

void save_calibration(const std::string& path, const CalibrationSet& params) {
    json doc = json::object();
    for (const auto& [pair, p] : params) {
        doc[pair_key(pair.first, pair.second)] = {{"eta", p.eta},
                                                  {"tau", p.tau},
                                                  {"iterations", p.iterations},
                                                  {"converged", p.converged},
                                                  {"final_nll", p.final_nll}};
    }
    atomic_write(path, doc.dump(2) + "\n");
}

CalibrationSet load_calibration(const std::string& path) {
    json doc = doc_from_file(path);
    CalibrationSet out;
    for (const auto& [key, value] : doc.items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos) {
            throw ParseError("bad pair key '" + key + "' in " + path);
        }
        CalibrationParams p;
        p.class_i = std::stoul(key.substr(0, comma));
        p.class_j = std::stoul(key.substr(comma + 1));
        p.eta = value.at("eta").get<double>();
        p.tau = value.at("tau").get<double>();
        p.iterations = value.value("iterations", std::size_t{0});
        p.converged = value.value("converged", false);
        p.final_nll = value.value("final_nll", 0.0);
        out[{p.class_i, p.class_j}] = p;
    }
    return out;
}

std::string method_name(CouplingMethod m) {
    switch (m) {
        case CouplingMethod::kkt: return "kkt";
        case CouplingMethod::projected_gradient: return "projected_gradient";
        case CouplingMethod::repaired: return "repaired";
    }
    return "unknown";
}

void save_predictions(const std::string& path, const std::vector<std::string>& class_labels,
                      const std::vector<Prediction>& predictions) {
    json doc;
    doc["classes"] = class_labels;
    json samples = json::array();
    for (const auto& pred : predictions) {
        samples.push_back({{"id", pred.id},
                           {"p", pred.p},
                           {"label", pred.label},
                           {"votes", pred.votes},
                           {"method", pred.method}});
    }
    doc["samples"] = std::move(samples);
    atomic_write(path, doc.dump(2) + "\n");
}

std::vector<Prediction> load_predictions(const std::string& path) {
    json doc = doc_from_file(path);
    std::vector<Prediction> out;
    for (const auto& s : doc.at("samples")) {
        Prediction pred;
        pred.id = s.at("id").get<std::string>();
        pred.p = s.at("p").get<std::vector<double>>();
        pred.label = s.at("label").get<std::size_t>();
        pred.votes = s.value("votes", std::vector<std::size_t>{});
        pred.method = s.value("method", "");
        out.push_back(std::move(pred));
    }
    return out;
}

namespace {

json metrics_to_json(const Metrics& m) {
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    return {{"precision", opt(m.precision)},
            {"recall", opt(m.recall)},
            {"specificity", opt(m.specificity)},
            {"f1", opt(m.f1)}};
}

} // namespace

void save_report(const std::string& path, const EvalReport& report) {
    json doc;
    if (!report.class_labels.empty()) {
        doc["classes"] = report.class_labels;
        json per_class = json::array();
        for (std::size_t c = 0; c < report.class_labels.size(); ++c) {
            const auto& counts = report.per_class_counts[c];
            json entry = {{"class", report.class_labels[c]},
                          {"tp", counts.tp},
                          {"fp", counts.fp},
                          {"fn", counts.fn},
                          {"tn", counts.tn}};
            entry["metrics"] = metrics_to_json(report.per_class_metrics[c]);
            per_class.push_back(std::move(entry));
        }
        doc["per_class"] = std::move(per_class);
    }
    if (report.overall_accuracy) {
        doc["overall_accuracy"] = *report.overall_accuracy;
    }
    if (!report.strategies.empty()) {
        json strategies = json::array();
        for (const auto& rec : report.strategies) {
            strategies.push_back({{"name", rec.name},
                                  {"per_seed_accuracy", rec.per_seed_accuracy},
                                  {"mean", rec.mean},
                                  {"stddev", rec.stddev}});
        }
        doc["strategies"] = std::move(strategies);
    }
    if (report.config) {
        const auto& c = *report.config;
        doc["config"] = {{"num_classes", c.num_classes},
                         {"per_class", c.per_class},
                         {"dim", c.dim},
                         {"separation", c.separation},
                         {"train_fraction", c.train_fraction},
                         {"strategies", c.strategies},
                         {"seeds", c.seeds}};
    }
    atomic_write(path, doc.dump(2) + "\n");
}

} // namespace ovo::io
