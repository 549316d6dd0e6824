/*
 * Copyright 2026 The faintedge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

namespace faintedge {

// Six significant digits with '.' as decimal separator; NaN prints empty.
std::string format_number(double value);

// Joins cells with commas and appends a newline.
std::string csv_line(const std::vector<std::string>& cells);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal polyline chart with axes, ticks and a legend.
std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

}  // namespace faintedge
