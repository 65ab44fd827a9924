// Copyright 2026 The sigcomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIGCOMM_SVG_HPP_
#define SIGCOMM_SVG_HPP_

#include <string>
#include <vector>

namespace sigcomm {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
};

// Static SVG documents with linear axes fitted to the data.
std::string svg_line_plot(const std::vector<Series>& series, const PlotOptions& options);
std::string svg_scatter_plot(const std::vector<Series>& series, const PlotOptions& options);

}  // namespace sigcomm

#endif  // SIGCOMM_SVG_HPP_
