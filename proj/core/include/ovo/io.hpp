#pragma once

#include <string>
#include <vector>

#include "ovo/calibration.hpp"
#include "ovo/classifiers.hpp"
#include "ovo/coupling.hpp"
#include "ovo/eval.hpp"

namespace ovo::io {

/// Writes content to a temp file in the target directory, then renames it
/// over the target path. An interrupted write never leaves a partial file.
void atomic_write(const std::string& path, const std::string& content);

/// CSV with header: feature columns f0..f{d-1}, then `label` (class name)
/// or `labels` (semicolon-separated names).
LabeledDataset load_dataset_csv(const std::string& path);

void save_suite(const std::string& path, const ClassifierSuite& suite);
ClassifierSuite load_suite(const std::string& path);

void save_model(const std::string& path, const ClassSet& classes, const MultiOutputModel& model);
std::pair<ClassSet, MultiOutputModel> load_model(const std::string& path);

/// JSON object mapping "i,j" (i < j) to the fitted params.
void save_calibration(const std::string& path, const CalibrationSet& params);
CalibrationSet load_calibration(const std::string& path);

struct Prediction {
    std::string id;
    std::vector<double> p;
    std::size_t label = 0;
    std::vector<std::size_t> votes;
    std::string method;
};

void save_predictions(const std::string& path, const std::vector<std::string>& class_labels,
                      const std::vector<Prediction>& predictions);
std::vector<Prediction> load_predictions(const std::string& path);

void save_report(const std::string& path, const EvalReport& report);

std::string method_name(CouplingMethod m);

} // namespace ovo::io
