#ifndef SEARCHLAB_SVG_PLOT_H
#define SEARCHLAB_SVG_PLOT_H

#include <optional>
#include <string>
#include <vector>

#include "searchlab/stats.h"

namespace searchlab {

struct PlotSpec {
  std::string title;
  std::string x_label = "trial";
  std::string y_label;
  std::optional<double> y_min;  // absent: from the data
  std::optional<double> y_max;
  bool envelopes = false;  // shade mean +/- 1 SD where a point carries an SD
};

// One line per series, colored by order, with a legend. Gap points break the
// line instead of interpolating. Output is a complete standalone SVG document
// and is byte-deterministic for identical input.
std::string render_line_chart(const std::vector<Series>& series, const PlotSpec& spec);

}  // namespace searchlab

#endif  // SEARCHLAB_SVG_PLOT_H
