#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "funrec/curve.hpp"
#include "funrec/estimator.hpp"

namespace funrec {

// Dataset CSV: the header row holds the grid abscissae as decimal literals
// followed by a final "y" column; each subsequent row is one observation's
// grid values followed by the scalar response.

struct Dataset {
    GridPtr grid;
    std::vector<LabeledCurve> observations;
};

struct PointSet {
    GridPtr grid;
    std::vector<Curve> points;
};

void write_dataset_csv(const std::filesystem::path& path, std::span<const LabeledCurve> data);
Dataset read_dataset_csv(const std::filesystem::path& path);

// Same layout without the response column; a trailing "y" column is ignored,
// so simulated datasets can double as point files.
PointSet read_points_csv(const std::filesystem::path& path);

}  // namespace funrec
