#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gci/estimators.hpp"
#include "gci/space.hpp"

namespace gci {

// Metadata describing how a CSV file maps onto a metric space: the '#space='
// line plus the column layout (covariates first, then the treatment column,
// then one block of outcome columns whose width the space determines).
struct DatasetHeader {
  std::string space_tag;                      // euclidean | frobenius | sphere | wasserstein
  std::map<std::string, std::string> params;  // tag-specific dimension parameters
  std::vector<std::string> covariates;
  std::string treatment = "T";
};

// Parses a metadata line ("#space=sphere,d=3", leading '#space=' optional).
DatasetHeader parse_space_header(const std::string& line);

// Canonical metadata line for a space (starts with '#space=').
std::string format_space_header(const MetricSpace& space, const std::string& treatment = "T");

// Instantiates the metric space a header describes.
std::unique_ptr<MetricSpace> make_space(const DatasetHeader& header);

struct Dataset {
  DatasetHeader header;
  std::unique_ptr<MetricSpace> space;
  Sample sample;
};

// Reads a CSV dataset. The '#space=' line may be overridden (or supplied for
// headerless files) via `header_override`. Outcome columns are decoded per
// space: compositional rows arrive on the simplex and are square-root mapped,
// matrix rows arrive as packed upper triangles. Rows violating the space
// invariants beyond d = 1e-6 raise validation errors; rows within tolerance
// but infeasible are snapped by the metric projection.
Dataset read_dataset(const std::string& path, const std::string& header_override = "");

// Writes a CSV dataset (format_space_header line, column header, one row per
// unit, 17-significant-digit floats so a read-back is exact). Compositional
// outcomes are written in simplex form, matrix outcomes as upper triangles.
void write_dataset(const std::string& path, const MetricSpace& space, const Sample& sample,
                   const std::vector<std::string>& covariate_names = {});

// The on-disk encoding of a single point (same transform as outcome columns).
Vec encode_point(const MetricSpace& space, const Vec& y);

// Column names of that encoding.
std::vector<std::string> point_column_names(const MetricSpace& space);

}  // namespace gci
