/// @file
/// @brief Minimal static SVG line plots of logged trace columns.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nsadm/sim.hpp"

namespace nsadm {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color{"#1f77b4"};
  bool dashed{false};
};

struct PlotPanel {
  std::string title;
  std::string xlabel{"t [s]"};
  std::string ylabel;
  std::vector<PlotSeries> series;
};

/// Autoscaled axes with ticks, one polyline per series and a legend.
std::string render_svg(const PlotPanel &panel, int width = 760, int height = 380);

/// Position, force and torque panels; several labelled traces are overlaid.
std::vector<PlotPanel>
run_panels(const std::vector<std::pair<std::string, const Trace *>> &traces,
           const Scenario &sc);

/// Writes position.svg, force.svg and torque.svg into dir; returns the paths.
std::vector<std::string>
write_run_plots(const std::string &dir,
                const std::vector<std::pair<std::string, const Trace *>> &traces,
                const Scenario &sc);

} // namespace nsadm
