#pragma once

#include <string>

#include "spdc/montecarlo.hpp"
#include "spdc/scans.hpp"

namespace spdc::svg {

/// Self-contained SVG line plot of a scan profile. Errors on empty input.
void write_scan_svg(const scan::ScanProfile& profile, const std::string& path,
                    const std::string& title);

/// Scatter plot with sqrt(counts) Poisson error bars.
void write_counts_svg(const mc::CountsProfile& profile, const std::string& path,
                      const std::string& title);

}  // namespace spdc::svg
