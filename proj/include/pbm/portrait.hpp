#pragma once

// Static SVG phase portraits: trajectory polylines over a view box with
// located periodic points drawn as labeled circles.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "pbm/core.hpp"
#include "pbm/ode.hpp"

namespace pbm {

struct PortraitOptions {
    double x_min = -3.0, x_max = 3.0, y_min = -3.0, y_max = 3.0;
    int seeds_per_axis = 9;
    double t_span = 8.0;  // forward and backward integration time per seed
    int width = 720, height = 720;
    double stroke_width = 0.8;
};

struct PortraitMark {
    std::string label;
    Vec2 position;
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace detail

// Trajectories of the frozen (t = 0 snapshot uses the true time dependence of
// the field along each run) flow from a seed grid, clipped to the view box.
inline std::string render_portrait_svg(const PlanarHamiltonianSystem& sys,
                                       const std::vector<PortraitMark>& marks,
                                       const PortraitOptions& opt = {}) {
    auto to_px = [&](Vec2 z) {
        double px = (z.x - opt.x_min) / (opt.x_max - opt.x_min) * opt.width;
        double py = (opt.y_max - z.y) / (opt.y_max - opt.y_min) * opt.height;
        return std::pair<double, double>{px, py};
    };
    auto in_view = [&](Vec2 z) {
        return z.x >= opt.x_min && z.x <= opt.x_max && z.y >= opt.y_min && z.y <= opt.y_max;
    };

    std::string svg;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  opt.width, opt.height, opt.width, opt.height);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes
    if (opt.x_min < 0.0 && opt.x_max > 0.0) {
        auto [x0, y0] = to_px({0.0, opt.y_min});
        auto [x1, y1] = to_px({0.0, opt.y_max});
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
                      x0, y0, x1, y1);
        svg += buf;
    }
    if (opt.y_min < 0.0 && opt.y_max > 0.0) {
        auto [x0, y0] = to_px({opt.x_min, 0.0});
        auto [x1, y1] = to_px({opt.x_max, 0.0});
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
                      x0, y0, x1, y1);
        svg += buf;
    }

    auto draw_run = [&](Vec2 seed, double direction) {
        auto rhs = [&](double t, const OdeState<2>& y, OdeState<2>& dy) {
            Vec2 v = sys.field(t, {y[0], y[1]});
            dy[0] = direction * v.x;
            dy[1] = direction * v.y;
        };
        std::string pts;
        int live = 0;
        OdeOptions ode;
        ode.abs_tol = ode.rel_tol = 1e-8;
        ode.max_dt = opt.t_span / 400.0;
        try {
            integrate_adaptive<2>(rhs, OdeState<2>{seed.x, seed.y}, 0.0, opt.t_span, ode,
                                  [&](double, const OdeState<2>& y) {
                                      Vec2 z{y[0], y[1]};
                                      if (!in_view(z)) {
                                          if (live >= 2) {
                                              svg += "<polyline fill=\"none\" stroke=\"#3366aa\" "
                                                     "stroke-width=\"" +
                                                     detail::fmt_num(opt.stroke_width) +
                                                     "\" points=\"" + pts + "\"/>\n";
                                          }
                                          pts.clear();
                                          live = 0;
                                          return;
                                      }
                                      auto [px, py] = to_px(z);
                                      char p[48];
                                      std::snprintf(p, sizeof p, "%.1f,%.1f ", px, py);
                                      pts += p;
                                      ++live;
                                  });
        } catch (const Error&) {
            // a run that blows up or stalls simply ends its polyline
        }
        if (live >= 2) {
            svg += "<polyline fill=\"none\" stroke=\"#3366aa\" stroke-width=\"" +
                   detail::fmt_num(opt.stroke_width) + "\" points=\"" + pts + "\"/>\n";
        }
    };

    for (int i = 0; i < opt.seeds_per_axis; ++i)
        for (int j = 0; j < opt.seeds_per_axis; ++j) {
            Vec2 seed{opt.x_min + (opt.x_max - opt.x_min) * (i + 0.5) / opt.seeds_per_axis,
                      opt.y_min + (opt.y_max - opt.y_min) * (j + 0.5) / opt.seeds_per_axis};
            draw_run(seed, 1.0);
            draw_run(seed, -1.0);
        }

    for (const auto& m : marks) {
        if (!in_view(m.position)) continue;
        auto [px, py] = to_px(m.position);
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4\" fill=\"#cc3333\"/>\n"
                      "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"16\" "
                      "fill=\"#222222\">%s</text>\n",
                      px, py, px + 8.0, py - 8.0, m.label.c_str());
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace pbm
