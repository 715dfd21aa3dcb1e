#include "cot/tables.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace edgeserve::cot {
namespace {

// [model][paths row][dataset][CoT, SC-CoT]
constexpr int kTables[2][5][7][2] = {
    // LaMDA-137B
    {
        {{49, 44}, {52, 47}, {39, 34}, {17, 15}, {58, 55}, {65, 63}, {55, 51}},
        {{49, 53}, {52, 63}, {39, 43}, {17, 21}, {58, 61}, {65, 66}, {55, 57}},
        {{49, 56}, {52, 69}, {39, 49}, {17, 24}, {58, 62}, {65, 67}, {55, 58}},
        {{49, 57}, {52, 71}, {39, 51}, {17, 25}, {58, 62}, {65, 67}, {55, 59}},
        {{49, 58}, {52, 73}, {39, 52}, {17, 26}, {58, 62}, {65, 68}, {55, 59}},
    },
    // PaLM-540B
    {
        {{74, 71}, {94, 89}, {79, 71}, {56, 50}, {79, 75}, {75, 74}, {85, 78}},
        {{74, 78}, {94, 97}, {79, 83}, {56, 65}, {79, 79}, {75, 78}, {85, 86}},
        {{74, 80}, {94, 98}, {79, 85}, {56, 70}, {79, 80}, {75, 79}, {85, 87}},
        {{74, 81}, {94, 98}, {79, 85}, {56, 71}, {79, 80}, {75, 80}, {85, 88}},
        {{74, 81}, {94, 98}, {79, 85}, {56, 72}, {79, 80}, {75, 80}, {85, 88}},
    },
};

std::size_t model_index(std::string_view model) {
    auto it = std::find(kTableModels.begin(), kTableModels.end(), model);
    if (it == kTableModels.end()) throw DomainError("unknown table model '" + std::string(model) + "'");
    return static_cast<std::size_t>(it - kTableModels.begin());
}

std::size_t dataset_index(std::string_view dataset) {
    auto it = std::find(kDatasets.begin(), kDatasets.end(), dataset);
    if (it == kDatasets.end()) throw DomainError("unknown dataset '" + std::string(dataset) + "'");
    return static_cast<std::size_t>(it - kDatasets.begin());
}

}  // namespace

bool is_table_model(std::string_view model) {
    return std::find(kTableModels.begin(), kTableModels.end(), model) != kTableModels.end();
}

bool is_dataset(std::string_view dataset) {
    return std::find(kDatasets.begin(), kDatasets.end(), dataset) != kDatasets.end();
}

double accuracy_lookup(std::string_view model, std::string_view dataset, double paths, PromptMode mode) {
    const std::size_t mi = model_index(model);
    const std::size_t di = dataset_index(dataset);
    const int col = mode == PromptMode::CoT ? 0 : 1;
    if (!(paths >= kPathGrid.front() && paths <= kPathGrid.back()))
        throw DomainError("accuracy_lookup: paths outside the table grid");
    for (std::size_t r = 0; r + 1 < kPathGrid.size(); ++r) {
        const double lo = kPathGrid[r], hi = kPathGrid[r + 1];
        if (paths == lo) return kTables[mi][r][di][col];
        if (paths < hi) {
            const double w = (paths - lo) / (hi - lo);
            return (1.0 - w) * kTables[mi][r][di][col] + w * kTables[mi][r + 1][di][col];
        }
    }
    return kTables[mi][kPathGrid.size() - 1][di][col];
}

std::vector<TableCell> table_cells() {
    std::vector<TableCell> out;
    for (std::size_t mi = 0; mi < kTableModels.size(); ++mi)
        for (std::size_t r = 0; r < kPathGrid.size(); ++r)
            for (std::size_t di = 0; di < kDatasets.size(); ++di)
                for (int col = 0; col < 2; ++col)
                    out.push_back({std::string(kTableModels[mi]), std::string(kDatasets[di]), kPathGrid[r],
                                   col == 0 ? PromptMode::CoT : PromptMode::ScCoT,
                                   static_cast<double>(kTables[mi][r][di][col])});
    return out;
}

DerivedCalibration derive_calibration(std::string_view model, std::string_view dataset) {
    const double cot = accuracy_lookup(model, dataset, 0, PromptMode::CoT);
    const double sc = accuracy_lookup(model, dataset, 20, PromptMode::ScCoT);
    return {cot / 100.0, 1.0 - std::max(sc - cot, 1.0) / 100.0};
}

}  // namespace edgeserve::cot
