#include "hybridsim/report.hpp"

#include "hybridsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hybridsim {

namespace {

std::string fmt(double v, const char* spec = "%.10g")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v == 0.0 ? 0.0 : v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep))
        out.push_back(cell);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

std::optional<double> parse_opt(const std::string& s, std::size_t line_no)
{
    if (s.empty())
        return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os << content;
    if (!os)
        throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows)
{
    os << kResultsHeader << '\n';
    for (const auto& r : rows) {
        os << r.design << ',' << r.scenario << ',' << fmt_opt(r.bias_b) << ',' << fmt_opt(r.true_bias) << ','
           << fmt(r.coverage) << ',' << fmt(r.power) << ',' << fmt_opt(r.mean_person_years) << ','
           << fmt_opt(r.mean_inclusion_fraction) << ',' << r.iterations << '\n';
    }
}

std::vector<MetricsRow> read_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw IoError("empty results file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kResultsHeader)
        throw IoError("unexpected header: " + line);
    std::vector<MetricsRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != 9)
            throw IoError("line " + std::to_string(line_no) + ": expected 9 fields");
        MetricsRow r;
        r.design = cells[0];
        r.scenario = cells[1];
        r.bias_b = parse_opt(cells[2], line_no);
        r.true_bias = parse_opt(cells[3], line_no);
        const auto cov = parse_opt(cells[4], line_no);
        const auto pow = parse_opt(cells[5], line_no);
        const auto its = parse_opt(cells[8], line_no);
        if (!cov || !pow || !its)
            throw IoError("line " + std::to_string(line_no) + ": missing required field");
        r.coverage = *cov;
        r.power = *pow;
        r.mean_person_years = parse_opt(cells[6], line_no);
        r.mean_inclusion_fraction = parse_opt(cells[7], line_no);
        r.iterations = static_cast<int>(*its);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<MetricsRow> read_csv(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open " + path.string());
    return read_csv(is);
}

nlohmann::json to_json(const MetricsRow& r)
{
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {
        {"design", r.design},
        {"scenario", r.scenario},
        {"bias_b", opt(r.bias_b)},
        {"true_bias", opt(r.true_bias)},
        {"coverage", r.coverage},
        {"power", r.power},
        {"mean_person_years", opt(r.mean_person_years)},
        {"mean_inclusion_fraction", opt(r.mean_inclusion_fraction)},
        {"iterations", r.iterations},
    };
}

nlohmann::json to_json(const EsCvtmleResult& result)
{
    nlohmann::json folds = nlohmann::json::array();
    for (std::size_t k = 0; k < result.decisions.size(); ++k) {
        const auto& d = result.decisions[k];
        folds.push_back({{"fold", d.fold},
                         {"choice", std::string(to_string(d.choice))},
                         {"b_hat", d.b_hat},
                         {"var_rct", d.var_rct},
                         {"var_pooled", d.var_pooled},
                         {"psi_v", result.fold_estimates[k].psi_v}});
    }
    return {{"psi", result.estimate.psi},
            {"lower", result.estimate.lower},
            {"upper", result.estimate.upper},
            {"inclusion_fraction", result.rwd_inclusion_fraction},
            {"per_fold", folds}};
}

void emit_tables(const std::vector<MetricsRow>& rows, const nlohmann::json& metadata,
                 const std::filesystem::path& dir)
{
    if (rows.empty())
        throw IoError("refusing to write an empty results table");
    ensure_dir(dir);
    std::ostringstream csv;
    write_csv(csv, rows);
    write_file(dir / "results.csv", csv.str());

    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
        j["rows"].push_back(to_json(r));
    j["metadata"] = metadata;
    write_file(dir / "results.json", j.dump(2) + "\n");
}

void emit_timing(double wall_seconds, int parallelism, const std::filesystem::path& dir)
{
    ensure_dir(dir);
    const nlohmann::json j = {{"wall_seconds", wall_seconds}, {"parallelism", parallelism}};
    write_file(dir / "timing.json", j.dump(2) + "\n");
}

namespace {

struct Point {
    double x;
    double y;
    std::optional<std::size_t> grid_index;
};

struct Series {
    std::string label;
    std::string color;
    std::string dash;
    std::vector<Point> points;
};

struct Panel {
    std::string title;
    double (*value)(const MetricsRow&);
    bool (*has)(const MetricsRow&);
    std::optional<double> reference;
};

std::string esc(const std::string& s)
{
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

std::optional<std::size_t> grid_index_of(double b)
{
    try {
        return bias_grid().index_of(b);
    } catch (const Error&) {
        return std::nullopt;
    }
}

bool is_reference_design(const MetricsRow& r) { return !r.bias_b.has_value(); }

constexpr double kPanelW = 380, kPanelH = 300, kLeft = 60, kTop = 50, kGap = 30;

}  // namespace

std::string render_plot(const std::vector<MetricsRow>& rows)
{
    if (rows.empty())
        throw IoError("no rows to plot");

    const Panel panels[] = {
        {"95% CI coverage", [](const MetricsRow& r) { return r.coverage; }, [](const MetricsRow&) { return true; },
         0.95},
        {"Power", [](const MetricsRow& r) { return r.power; }, [](const MetricsRow&) { return true; },
         std::nullopt},
        {"Mean placebo person-years",
         [](const MetricsRow& r) { return r.mean_person_years.value_or(0.0); },
         [](const MetricsRow& r) { return r.mean_person_years.has_value(); }, std::nullopt},
    };

    double x_max = 0.0;
    for (const auto& r : rows)
        if (r.true_bias)
            x_max = std::max(x_max, std::abs(*r.true_bias));
    if (x_max <= 0.0)
        x_max = 0.025;
    x_max *= 1.08;

    const double width = kLeft + 3 * kPanelW + 2 * (kGap + kLeft) + 20;
    const double height = kTop + kPanelH + 110;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, "%.0f") << "\" height=\""
        << fmt(height, "%.0f") << "\" viewBox=\"0 0 " << fmt(width, "%.0f") << ' ' << fmt(height, "%.0f")
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    std::vector<std::pair<std::string, std::string>> legend;  // label, style
    for (int p = 0; p < 3; ++p) {
        const Panel& panel = panels[p];
        const double ox = kLeft + p * (kPanelW + kGap + kLeft);
        const double oy = kTop;

        double y_lo = 1e300, y_hi = -1e300;
        for (const auto& r : rows) {
            if (!panel.has(r))
                continue;
            y_lo = std::min(y_lo, panel.value(r));
            y_hi = std::max(y_hi, panel.value(r));
        }
        if (panel.reference) {
            y_lo = std::min(y_lo, *panel.reference);
            y_hi = std::max(y_hi, *panel.reference);
        }
        if (y_lo > y_hi) {
            y_lo = 0.0;
            y_hi = 1.0;
        }
        const double pad = std::max((y_hi - y_lo) * 0.1, std::abs(y_hi) * 0.01 + 1e-3);
        y_lo -= pad;
        y_hi += pad;
        auto sx = [&](double x) { return ox + x / x_max * kPanelW; };
        auto sy = [&](double y) { return oy + kPanelH - (y - y_lo) / (y_hi - y_lo) * kPanelH; };

        svg << "<g>\n<text x=\"" << fmt(ox + kPanelW / 2, "%.1f") << "\" y=\"" << fmt(oy - 15, "%.1f")
            << "\" text-anchor=\"middle\" font-size=\"13\">" << esc(panel.title) << "</text>\n";
        svg << "<rect x=\"" << fmt(ox, "%.1f") << "\" y=\"" << fmt(oy, "%.1f") << "\" width=\""
            << fmt(kPanelW, "%.1f") << "\" height=\"" << fmt(kPanelH, "%.1f")
            << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
            const double xv = x_max * t / 4.0;
            svg << "<text x=\"" << fmt(ox - 5, "%.1f") << "\" y=\"" << fmt(sy(yv) + 4, "%.1f")
                << "\" text-anchor=\"end\">" << fmt(yv, p == 2 ? "%.0f" : "%.3f") << "</text>\n";
            svg << "<text x=\"" << fmt(sx(xv), "%.1f") << "\" y=\"" << fmt(oy + kPanelH + 15, "%.1f")
                << "\" text-anchor=\"middle\">" << fmt(xv, "%.3f") << "</text>\n";
        }
        svg << "<text x=\"" << fmt(ox + kPanelW / 2, "%.1f") << "\" y=\"" << fmt(oy + kPanelH + 32, "%.1f")
            << "\" text-anchor=\"middle\">|true bias| (risk difference)</text>\n";

        if (panel.reference) {
            svg << "<line class=\"reference\" x1=\"" << fmt(ox, "%.1f") << "\" x2=\"" << fmt(ox + kPanelW, "%.1f")
                << "\" y1=\"" << fmt(sy(*panel.reference), "%.2f") << "\" y2=\"" << fmt(sy(*panel.reference), "%.2f")
                << "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
            svg << "<text x=\"" << fmt(ox + kPanelW - 4, "%.1f") << "\" y=\""
                << fmt(sy(*panel.reference) - 4, "%.1f") << "\" text-anchor=\"end\" fill=\"#777\">"
                << fmt(*panel.reference, "%.2f") << "</text>\n";
        }

        int ref_k = 0;
        for (const auto& r : rows) {
            if (!is_reference_design(r) || !panel.has(r))
                continue;
            const std::string color = r.design == "D1" ? "#1b9e77" : r.design == "D2" ? "#d95f02" : "#555";
            const double y = sy(panel.value(r));
            svg << "<line class=\"design-ref\" x1=\"" << fmt(ox, "%.1f") << "\" x2=\"" << fmt(ox + kPanelW, "%.1f")
                << "\" y1=\"" << fmt(y, "%.2f") << "\" y2=\"" << fmt(y, "%.2f") << "\" stroke=\"" << color
                << "\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";
            svg << "<text x=\"" << fmt(ox + 4, "%.1f") << "\" y=\"" << fmt(y - 4 - 10 * ref_k, "%.1f")
                << "\" fill=\"" << color << "\">" << esc(r.design) << "</text>\n";
            ++ref_k;
            if (p == 0)
                legend.emplace_back(r.design + " (" + r.scenario + ")",
                                    "stroke=\"" + color + "\" stroke-dasharray=\"6,4\"");
        }

        std::map<std::string, Series> series;
        for (const auto& r : rows) {
            if (is_reference_design(r) || !panel.has(r))
                continue;
            const double x = std::abs(r.true_bias.value_or(0.0));
            const Point pt{x, panel.value(r), grid_index_of(*r.bias_b)};
            const std::string base = r.design + " " + r.scenario;
            const bool d3 = r.design == "D3";
            if (*r.bias_b >= 0.0) {
                auto& s = series[base + " away from null"];
                s.label = base + " away from null";
                s.color = d3 ? "#7b3294" : "#2c7bb6";
                s.points.push_back(pt);
            }
            if (*r.bias_b <= 0.0) {
                auto& s = series[base + " towards null"];
                s.label = base + " towards null";
                s.color = d3 ? "#e7298a" : "#abd9e9";
                s.dash = "4,2";
                s.points.push_back(pt);
            }
        }
        for (auto& [key, s] : series) {
            std::sort(s.points.begin(), s.points.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
            if (s.points.size() > 1) {
                svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
                if (!s.dash.empty())
                    svg << " stroke-dasharray=\"" << s.dash << "\"";
                svg << " points=\"";
                for (const auto& pt : s.points)
                    svg << fmt(sx(pt.x), "%.2f") << ',' << fmt(sy(pt.y), "%.2f") << ' ';
                svg << "\"/>\n";
            }
            for (const auto& pt : s.points) {
                svg << "<circle class=\"mark\" cx=\"" << fmt(sx(pt.x), "%.2f") << "\" cy=\""
                    << fmt(sy(pt.y), "%.2f") << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
                if (pt.grid_index && *pt.grid_index != 0)
                    svg << "<text x=\"" << fmt(sx(pt.x) + 3, "%.2f") << "\" y=\"" << fmt(sy(pt.y) - 5, "%.2f")
                        << "\" font-size=\"8\" fill=\"" << s.color << "\">" << *pt.grid_index << "</text>\n";
            }
            if (p == 0) {
                std::string style = "stroke=\"" + s.color + "\"";
                if (!s.dash.empty())
                    style += " stroke-dasharray=\"" + s.dash + "\"";
                legend.emplace_back(s.label, style);
            }
        }
        svg << "</g>\n";
    }

    double lx = kLeft, ly = kTop + kPanelH + 55;
    for (const auto& [label, style] : legend) {
        svg << "<line x1=\"" << fmt(lx, "%.1f") << "\" x2=\"" << fmt(lx + 24, "%.1f") << "\" y1=\""
            << fmt(ly, "%.1f") << "\" y2=\"" << fmt(ly, "%.1f") << "\" stroke-width=\"2\" " << style << "/>\n";
        svg << "<text x=\"" << fmt(lx + 30, "%.1f") << "\" y=\"" << fmt(ly + 4, "%.1f") << "\">" << esc(label)
            << "</text>\n";
        lx += 300;
        if (lx > width - 300) {
            lx = kLeft;
            ly += 18;
        }
    }
    svg << "<text x=\"" << fmt(width - 10, "%.1f") << "\" y=\"" << fmt(height - 8, "%.1f")
        << "\" text-anchor=\"end\" font-size=\"9\" fill=\"#777\">point labels: bias grid index</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void emit_plot(const std::vector<MetricsRow>& rows, const std::filesystem::path& path)
{
    const std::string svg = render_plot(rows);
    if (path.has_parent_path())
        ensure_dir(path.parent_path());
    write_file(path, svg);
}

}  // namespace hybridsim
