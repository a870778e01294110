// Copyright (c) 2026, The SPCL Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spcl/eval/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace spcl {
namespace {

// 3x5 glyphs, one row per 3-bit value, top row first.
const std::map<char, std::array<std::uint8_t, 5>>& glyphs() {
  static const std::map<char, std::array<std::uint8_t, 5>> g = {
      {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}}, {'3', {7, 1, 7, 1, 7}},
      {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}}, {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 1, 1, 1}},
      {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 7}}, {'.', {0, 0, 0, 0, 2}}, {'-', {0, 0, 7, 0, 0}},
      {'T', {7, 2, 2, 2, 2}}, {'P', {7, 5, 7, 4, 4}}, {'F', {7, 4, 6, 4, 4}}, {'N', {5, 7, 7, 7, 5}},
      {'E', {7, 4, 6, 4, 7}}, {'=', {0, 7, 0, 7, 0}}, {'t', {2, 7, 2, 2, 1}}, {' ', {0, 0, 0, 0, 0}},
  };
  return g;
}

void text(Image& img, int x, int y, const std::string& s, std::uint32_t color, int scale = 2) {
  for (char ch : s) {
    auto it = glyphs().find(ch);
    if (it != glyphs().end()) {
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 3; ++c)
          if (it->second[static_cast<std::size_t>(r)] & (4 >> c))
            for (int dy = 0; dy < scale; ++dy)
              for (int dx = 0; dx < scale; ++dx) img.set(x + c * scale + dx, y + r * scale + dy, color);
    }
    x += 4 * scale;
  }
}

void line(Image& img, int x0, int y0, int x1, int y1, std::uint32_t color) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    img.set(x0, y0, color);
    img.set(x0, y0 + 1, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::string fmt(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

constexpr std::uint32_t kPalette[] = {0x1f77b4, 0xd62728, 0x2ca02c, 0xff7f0e, 0x9467bd, 0x8c564b, 0x17becf};

}  // namespace

std::string distance_csv(const std::vector<DistanceReport>& reports) {
  std::string out = "epoch,tau,tp_mean,tp_std,fn_mean,fn_std\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%d,%.6g,%.8f,%.8f,%.8f,%.8f\n", r.epoch, r.tau, r.tp_mean, r.tp_std, r.fn_mean,
                  r.fn_std);
    out += buf;
  }
  return out;
}

Image plot_distances(const std::vector<DistanceReport>& reports) {
  constexpr int kPanelW = 380, kPanelH = 260, kMargin = 50, kTop = 40;
  Image img(2 * kPanelW + 3 * kMargin, kPanelH + kTop + kMargin + 30);
  if (reports.empty()) return img;
  std::set<double> taus;
  int e0 = reports.front().epoch, e1 = e0;
  for (const auto& r : reports) {
    taus.insert(r.tau);
    e0 = std::min(e0, r.epoch);
    e1 = std::max(e1, r.epoch);
  }
  for (int panel = 0; panel < 2; ++panel) {
    const int left = kMargin + panel * (kPanelW + kMargin);
    double lo = 1.0, hi = -1.0;
    for (const auto& r : reports) {
      const double v = panel == 0 ? r.tp_mean : r.fn_mean;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo < 1e-3) {
      lo -= 0.05;
      hi += 0.05;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto px = [&](int epoch) {
      return e1 == e0 ? left + kPanelW / 2 : left + (epoch - e0) * (kPanelW - 1) / (e1 - e0);
    };
    auto py = [&](double v) { return kTop + static_cast<int>(std::lround((hi - v) / (hi - lo) * (kPanelH - 1))); };
    for (int t = 0; t <= 4; ++t) {
      const double v = lo + (hi - lo) * t / 4.0;
      const int y = py(v);
      for (int x = left; x < left + kPanelW; x += 2) img.set(x, y, 0xdddddd);
      text(img, left - 46, y - 5, fmt(v, 2), 0x444444);
    }
    line(img, left, kTop, left, kTop + kPanelH, 0x000000);
    line(img, left, kTop + kPanelH, left + kPanelW, kTop + kPanelH, 0x000000);
    line(img, left, kTop, left + kPanelW, kTop, 0x000000);
    line(img, left + kPanelW, kTop, left + kPanelW, kTop + kPanelH, 0x000000);
    text(img, left + kPanelW / 2 - 8, 12, panel == 0 ? "TP" : "FN", 0x000000, 3);
    text(img, left, kTop + kPanelH + 8, std::to_string(e0), 0x444444);
    text(img, left + kPanelW - 24, kTop + kPanelH + 8, std::to_string(e1), 0x444444);
    std::size_t series = 0;
    for (double tau : taus) {
      const std::uint32_t color = kPalette[series % std::size(kPalette)];
      std::vector<const DistanceReport*> pts;
      for (const auto& r : reports)
        if (r.tau == tau) pts.push_back(&r);
      std::stable_sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->epoch < b->epoch; });
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double v = panel == 0 ? pts[i]->tp_mean : pts[i]->fn_mean;
        const int x = px(pts[i]->epoch), y = py(v);
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) img.set(x + dx, y + dy, color);
        if (i > 0) {
          const double pv = panel == 0 ? pts[i - 1]->tp_mean : pts[i - 1]->fn_mean;
          line(img, px(pts[i - 1]->epoch), py(pv), x, y, color);
        }
      }
      if (panel == 0) {
        const int lx = kMargin + static_cast<int>(series) * 120, ly = kTop + kPanelH + 30;
        for (int dy = 0; dy < 10; ++dy)
          for (int dx = 0; dx < 10; ++dx) img.set(lx + dx, ly + dy, color);
        text(img, lx + 16, ly, "t=" + fmt(tau, 2), 0x000000);
      }
      ++series;
    }
  }
  return img;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot write " + path.string());
  }
}

void export_report(const std::vector<DistanceReport>& reports, const std::filesystem::path& csv_path,
                   const std::filesystem::path& png_path) {
  if (reports.empty()) throw DataError("export_report: no reports");
  write_file_atomic(csv_path, distance_csv(reports));
  write_png(plot_distances(reports), png_path);
}

}  // namespace spcl
