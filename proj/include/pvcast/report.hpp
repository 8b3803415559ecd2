#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eval.hpp"
#include "text.hpp"
#include "time.hpp"

// Hand-emitted SVG charts for forecast-vs-actual comparisons. Output is a
// pure function of the input rows, so identical inputs give identical bytes.
namespace pvcast::report {

inline constexpr int kWidth = 960;
inline constexpr int kHeight = 540;

struct Frame {
    double left = 80, right = 30, top = 50, bottom = 70;

    double plot_w() const { return kWidth - left - right; }
    double plot_h() const { return kHeight - top - bottom; }
};

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) { return text::format_fixed(v, 2); }

// Smallest 1/2/5 x 10^k step giving at most `max_ticks` intervals over [0, hi].
inline double nice_step(double hi, int max_ticks = 8) {
    if (!(hi > 0.0)) return 1.0;
    const double raw = hi / max_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

class Chart {
public:
    Chart(std::string_view title, std::string_view x_label, std::string_view y_label, double y_max)
        : step_(nice_step(y_max)) {
        y_top_ = step_ * std::max(1.0, std::ceil(y_max / step_));
        os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
            << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
            << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
            << "\" fill=\"white\"/>\n"
            << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
            << "</text>\n";
        axes(x_label, y_label);
    }

    double x_at(double frac) const { return f_.left + frac * f_.plot_w(); }
    double y_at(double v) const { return f_.top + f_.plot_h() * (1.0 - std::clamp(v / y_top_, 0.0, 1.0)); }
    double baseline() const { return f_.top + f_.plot_h(); }
    double plot_w() const { return f_.plot_w(); }

    void x_tick(double frac, std::string_view label) {
        const double x = x_at(frac);
        os_ << "<line class=\"tick\" x1=\"" << num(x) << "\" y1=\"" << num(baseline()) << "\" x2=\"" << num(x)
            << "\" y2=\"" << num(baseline() + 5) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << num(x) << "\" y=\"" << num(baseline() + 20) << "\" text-anchor=\"middle\">"
            << escape(label) << "</text>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view cls, std::string_view color) {
        os_ << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            os_ << (i ? " " : "") << num(x_at(pts[i].first)) << ',' << num(y_at(pts[i].second));
        os_ << "\"/>\n";
    }

    void markers(const std::vector<std::pair<double, double>>& pts, std::string_view cls, std::string_view color) {
        for (const auto& [x, y] : pts)
            os_ << "<circle class=\"" << cls << "\" cx=\"" << num(x_at(x)) << "\" cy=\"" << num(y_at(y))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }

    void bar(double frac_left, double frac_width, double value, std::string_view label) {
        const double y = y_at(value);
        os_ << "<rect class=\"bar\" x=\"" << num(x_at(frac_left)) << "\" y=\"" << num(y) << "\" width=\""
            << num(frac_width * plot_w()) << "\" height=\"" << num(baseline() - y) << "\" fill=\"#d9534f\">"
            << "<title>" << escape(label) << "</title></rect>\n";
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
        double y = f_.top + 12;
        for (const auto& [name, color] : entries) {
            const double x = f_.left + f_.plot_w() - 150;
            os_ << "<line class=\"legend\" x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 24)
                << "\" y2=\"" << num(y) << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n"
                << "<text x=\"" << num(x + 30) << "\" y=\"" << num(y + 4) << "\">" << escape(name) << "</text>\n";
            y += 18;
        }
    }

    std::string finish() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    void axes(std::string_view x_label, std::string_view y_label) {
        os_ << "<line class=\"axis\" x1=\"" << num(f_.left) << "\" y1=\"" << num(baseline()) << "\" x2=\""
            << num(f_.left + f_.plot_w()) << "\" y2=\"" << num(baseline()) << "\" stroke=\"black\"/>\n"
            << "<line class=\"axis\" x1=\"" << num(f_.left) << "\" y1=\"" << num(f_.top) << "\" x2=\"" << num(f_.left)
            << "\" y2=\"" << num(baseline()) << "\" stroke=\"black\"/>\n";
        const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step_))));
        const int ticks = static_cast<int>(std::lround(y_top_ / step_));
        for (int k = 0; k <= ticks; ++k) {
            const double v = k * step_;
            const double y = y_at(v);
            os_ << "<line class=\"grid\" x1=\"" << num(f_.left) << "\" y1=\"" << num(y) << "\" x2=\""
                << num(f_.left + f_.plot_w()) << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n"
                << "<text x=\"" << num(f_.left - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
                << text::format_fixed(v, decimals) << "</text>\n";
        }
        os_ << "<text x=\"" << num(f_.left + f_.plot_w() / 2) << "\" y=\"" << kHeight - 20
            << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n"
            << "<text x=\"20\" y=\"" << num(f_.top + f_.plot_h() / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
            << num(f_.top + f_.plot_h() / 2) << ")\">" << escape(y_label) << "</text>\n";
    }

    std::ostringstream os_;
    Frame f_;
    double step_;
    double y_top_ = 1.0;
};

inline constexpr std::string_view kPredictedColor = "#1f77b4";
inline constexpr std::string_view kActualColor = "#2ca02c";

// Predicted and actual power over one day; x is time of day in hours.
inline std::string comparison_day_svg(const std::vector<eval::IntervalRow>& rows, Date day) {
    std::vector<std::pair<double, double>> pred, act;
    double y_max = 0.0;
    for (const auto& r : rows) {
        if (date_of(r.time) != day) continue;
        const double frac = minute_of_day(r.time) / static_cast<double>(kMinutesPerDay);
        pred.emplace_back(frac, r.predicted_w);
        act.emplace_back(frac, r.actual_w);
        y_max = std::max({y_max, r.predicted_w, r.actual_w});
    }
    Chart c("Actual and predicted PV power, " + format_date(day), "Time of day (h)", "Power (W)", y_max);
    for (int h = 0; h <= 24; h += 3) c.x_tick(h / 24.0, std::to_string(h));
    c.polyline(act, "series actual", kActualColor);
    c.polyline(pred, "series predicted", kPredictedColor);
    c.legend({{"actual", std::string(kActualColor)}, {"predicted", std::string(kPredictedColor)}});
    return c.finish();
}

inline double day_center(std::size_t i, std::size_t n) { return (static_cast<double>(i) + 0.5) / static_cast<double>(n); }

inline std::vector<std::size_t> label_days(std::size_t n) {
    std::vector<std::size_t> idx;
    const std::size_t every = std::max<std::size_t>(1, (n + 9) / 10);
    for (std::size_t i = 0; i < n; i += every) idx.push_back(i);
    return idx;
}

// Daily energy of both series, one point per day.
inline std::string comparison_month_svg(const std::vector<eval::DayRow>& days) {
    std::vector<std::pair<double, double>> pred, act;
    double y_max = 0.0;
    for (std::size_t i = 0; i < days.size(); ++i) {
        pred.emplace_back(day_center(i, days.size()), days[i].predicted_wh);
        act.emplace_back(day_center(i, days.size()), days[i].actual_wh);
        y_max = std::max({y_max, days[i].predicted_wh, days[i].actual_wh});
    }
    std::string title = "Daily energy, predicted vs actual";
    if (!days.empty()) title += ", " + format_date(days.front().date) + " to " + format_date(days.back().date);
    Chart c(title, "Date", "Energy (Wh)", y_max);
    for (auto i : label_days(days.size())) c.x_tick(day_center(i, days.size()), format_date(days[i].date).substr(5));
    c.polyline(act, "series actual", kActualColor);
    c.markers(act, "marker actual", kActualColor);
    c.polyline(pred, "series predicted", kPredictedColor);
    c.markers(pred, "marker predicted", kPredictedColor);
    c.legend({{"actual", std::string(kActualColor)}, {"predicted", std::string(kPredictedColor)}});
    return c.finish();
}

// One bar per day; days without a defined APE get a zero-height bar.
inline std::string ape_daily_svg(const std::vector<eval::DayRow>& days) {
    double y_max = 0.0;
    for (const auto& d : days)
        if (d.ape_pct) y_max = std::max(y_max, *d.ape_pct);
    Chart c("Absolute percentage error per day", "Date", "APE (%)", y_max);
    const double slot = days.empty() ? 1.0 : 1.0 / static_cast<double>(days.size());
    for (std::size_t i = 0; i < days.size(); ++i) {
        const auto& d = days[i];
        c.bar(i * slot + 0.15 * slot, 0.7 * slot, d.ape_pct.value_or(0.0),
              format_date(d.date) + ": " + (d.ape_pct ? num(*d.ape_pct) + " %" : std::string("undefined")));
    }
    for (auto i : label_days(days.size())) c.x_tick(day_center(i, days.size()), format_date(days[i].date).substr(5));
    return c.finish();
}

}  // namespace pvcast::report
