#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace edgeserve::cot {

enum class PromptMode { CoT, ScCoT };

inline constexpr std::array<std::string_view, 7> kDatasets = {
    "ASDiv", "MultiArith", "SVAMP", "GSM8K", "CommonsenseQA", "StrategyQA", "ARC"};
inline constexpr std::array<std::string_view, 2> kTableModels = {"LaMDA-137B", "PaLM-540B"};
inline constexpr std::array<int, 5> kPathGrid = {0, 5, 10, 15, 20};

/// Few-shot accuracy in percent. Exact on the path grid, linear in between.
/// Throws DomainError for unknown model or dataset names and paths outside [0, 20].
double accuracy_lookup(std::string_view model, std::string_view dataset, double paths, PromptMode mode);

struct TableCell {
    std::string model;
    std::string dataset;
    int paths;
    PromptMode mode;
    double percent;
};

/// Every grid cell of both tables (140 entries).
std::vector<TableCell> table_cells();

/// Zero-shot accuracy and reasoning gain derived from a table row:
/// alpha = CoT / 100 and beta = 1 - max(SC@20 - CoT, 1) / 100.
struct DerivedCalibration {
    double alpha;
    double beta;
};
DerivedCalibration derive_calibration(std::string_view model, std::string_view dataset);

bool is_table_model(std::string_view model);
bool is_dataset(std::string_view dataset);

}  // namespace edgeserve::cot
