#pragma once

#include "rann/analysis.hpp"

#include <string>

namespace rann {

/// Header `x,phi` for one-group 1D fields, `x,group,phi` for multigroup 1D
/// fields and `x,y,group,phi` in 2D (groups 1-based, grid-point major).
/// Numbers use 17 significant digits in scientific notation.
void write_flux_csv(const ScalarFluxField& field, const std::string& path);
std::string flux_csv_string(const ScalarFluxField& field);

ScalarFluxField read_flux_csv(const std::string& path);

}  // namespace rann
