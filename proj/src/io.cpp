#include "plastafem/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace plastafem {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trace_csv(std::ostream& out, const AdaptTrace& trace) {
    out << kTraceHeader << '\n';
    for (const LevelRecord& r : trace) {
        out << r.level << ',' << r.n_elements << ',' << r.n_dofs << ',' << format_double(r.eta_sq) << ','
            << format_double(r.energy) << ',' << r.n_marked << ',' << format_double(r.wall_ms) << '\n';
    }
}

std::string trace_to_csv(const AdaptTrace& trace) {
    std::ostringstream ss;
    write_trace_csv(ss, trace);
    return ss.str();
}

namespace {

template <class T>
T parse_field(std::string_view s, std::size_t row, const char* name) {
    T v{};
    std::string tmp(s);
    const auto [ptr, ec] = std::from_chars(tmp.data(), tmp.data() + tmp.size(), v);
    if (tmp.empty() || ec != std::errc() || ptr != tmp.data() + tmp.size()) {
        throw ArgumentError("trace row " + std::to_string(row) + ": malformed " + name + " '" + tmp + "'");
    }
    return v;
}

}  // namespace

AdaptTrace read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("trace: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) throw ArgumentError("trace: unexpected header '" + line + "'");
    AdaptTrace trace;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::string_view rest = line;
        for (;;) {
            const std::size_t c = rest.find(',');
            f.push_back(rest.substr(0, c));
            if (c == std::string_view::npos) break;
            rest.remove_prefix(c + 1);
        }
        if (f.size() != 7) throw ArgumentError("trace row " + std::to_string(row) + ": expected 7 fields");
        LevelRecord r;
        r.level = parse_field<std::size_t>(f[0], row, "level");
        r.n_elements = parse_field<std::size_t>(f[1], row, "n_elements");
        r.n_dofs = parse_field<std::size_t>(f[2], row, "n_dofs");
        r.eta_sq = parse_field<double>(f[3], row, "eta_sq");
        r.energy = parse_field<double>(f[4], row, "energy");
        r.n_marked = parse_field<std::size_t>(f[5], row, "n_marked");
        r.wall_ms = parse_field<double>(f[6], row, "wall_ms");
        trace.push_back(r);
    }
    return trace;
}

AdaptTrace trace_from_csv(const std::string& text) {
    std::istringstream ss(text);
    return read_trace_csv(ss);
}

std::string report_to_json(const AxiomReport& rep) {
    using nlohmann::json;
    json j;
    j["schema"] = "plastafem-axiom-report v1";

    json a1;
    a1["c1_est"] = rep.a1.c1_est;
    a1["per_pair"] = rep.a1.per_pair;
    a1["running"] = rep.a1.running;
    a1["guarded"] = rep.a1.guarded;
    j["a1"] = a1;

    json a2;
    a2["rho2_est"] = rep.a2.rho2_est;
    a2["c2_est"] = rep.a2.c2_est;
    a2["passed"] = rep.a2.passed;
    a2["running_rho2"] = rep.a2.running_rho2;
    a2["running_c2"] = rep.a2.running_c2;
    json samples = json::array();
    for (const auto& s : rep.a2.samples) {
        samples.push_back({{"old_refined", s.old_refined}, {"new_refined", s.new_refined}, {"dist_sq", s.dist_sq}});
    }
    a2["samples"] = samples;
    j["a2"] = a2;

    json a3;
    a3["eps3"] = rep.a3.eps3;
    a3["max_entry"] = rep.a3.max_entry;
    a3["bounded"] = rep.a3.bounded;
    a3["table"] = rep.a3.table;
    j["a3"] = a3;

    json a4;
    a4["c4_est"] = rep.a4.c4_est;
    a4["per_pair"] = rep.a4.per_pair;
    a4["running"] = rep.a4.running;
    a4["skipped"] = rep.a4.skipped;
    j["a4"] = a4;

    j["rates"] = {{"rho_linear", rep.rates.rho_linear},
                  {"rho_linear_passed", rep.rates.rho_linear > 0.0 && rep.rates.rho_linear < 1.0},
                  {"rate_s", rep.rates.rate_s},
                  {"energy_rate", rep.rates.energy_rate}};
    j["rates_asymptotic"] = {{"from_level", rep.asymptotic_from},
                             {"rho_linear", rep.rates_asymptotic.rho_linear},
                             {"rate_s", rep.rates_asymptotic.rate_s},
                             {"energy_rate", rep.rates_asymptotic.energy_rate}};
    j["reference"] = {{"eta_sq", rep.reference_eta_sq}, {"energy", rep.reference_energy}};
    j["c_mesh"] = rep.c_mesh;

    json levels = json::array();
    for (std::size_t l = 0; l < rep.levels.size(); ++l) {
        const LevelDiagnostics& d = rep.levels[l];
        json row = {{"level", d.level},           {"d_ref", d.d_ref},
                    {"d_next", d.d_next},         {"osc_sq", d.osc_sq},
                    {"reliability", d.reliability}, {"efficiency", d.efficiency},
                    {"energy_gap", d.energy_gap}, {"equivalence", d.equivalence},
                    {"xi_sq", d.xi_sq},           {"plastic_fraction", d.plastic_fraction}};
        if (l < rep.trace.size()) {
            const LevelRecord& r = rep.trace[l];
            row["n_elements"] = r.n_elements;
            row["n_dofs"] = r.n_dofs;
            row["eta_sq"] = r.eta_sq;
            row["energy"] = r.energy;
            row["n_marked"] = r.n_marked;
        }
        levels.push_back(row);
    }
    j["levels"] = levels;
    return j.dump(2) + "\n";
}

namespace {

struct Frame {
    double x0, y0, scale, height;
    double px(double x) const { return 10.0 + (x - x0) * scale; }
    double py(double y) const { return 10.0 + height - (y - y0) * scale; }
};

}  // namespace

std::string mesh_to_svg(const Mesh& mesh, const std::vector<std::size_t>& marked) {
    double x0 = HUGE_VAL, y0 = HUGE_VAL, x1 = -HUGE_VAL, y1 = -HUGE_VAL;
    for (const Vec2& v : mesh.vertices()) {
        x0 = std::min(x0, v.x);
        y0 = std::min(y0, v.y);
        x1 = std::max(x1, v.x);
        y1 = std::max(y1, v.y);
    }
    const double size = 600.0;
    const double scale = size / std::max(x1 - x0, y1 - y0);
    const Frame fr{x0, y0, scale, (y1 - y0) * scale};
    std::vector<char> is_marked(mesh.num_elements(), 0);
    for (std::size_t t : marked) is_marked.at(t) = 1;

    std::ostringstream s;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n",
                  (x1 - x0) * scale + 20.0, (y1 - y0) * scale + 20.0);
    s << buf;
    const double stroke = std::clamp(200.0 / std::sqrt(static_cast<double>(mesh.num_elements()) + 1.0), 0.2, 1.0);
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const Element& el = mesh.element(t);
        s << "<polygon points=\"";
        for (int k = 0; k < 3; ++k) {
            const Vec2& p = mesh.vertex(el.v[static_cast<std::size_t>(k)]);
            std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", k ? " " : "", fr.px(p.x), fr.py(p.y));
            s << buf;
        }
        std::snprintf(buf, sizeof buf, "\" fill=\"%s\" stroke=\"black\" stroke-width=\"%.2f\"/>\n",
                      is_marked[t] ? "#f4a582" : "white", stroke);
        s << buf;
    }
    for (const Edge& e : mesh.edges()) {
        if (e.tag != EdgeTag::Dirichlet) continue;
        const Vec2& p = mesh.vertex(e.v.first);
        const Vec2& q = mesh.vertex(e.v.second);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"#2166ac\" stroke-width=\"3\"/>\n",
                      fr.px(p.x), fr.py(p.y), fr.px(q.x), fr.py(q.y));
        s << buf;
    }
    s << "</svg>\n";
    return s.str();
}

std::string rate_plot_svg(const std::vector<RateSeries>& series, const std::string& x_label) {
    static const char* colors[] = {"#b2182b", "#2166ac", "#1b7837", "#762a83"};
    double lx0 = HUGE_VAL, lx1 = -HUGE_VAL, ly0 = HUGE_VAL, ly1 = -HUGE_VAL;
    for (const auto& sr : series) {
        for (std::size_t i = 0; i < sr.n.size(); ++i) {
            if (!(sr.n[i] > 0.0 && sr.value[i] > 0.0)) continue;
            lx0 = std::min(lx0, std::log10(sr.n[i]));
            lx1 = std::max(lx1, std::log10(sr.n[i]));
            ly0 = std::min(ly0, std::log10(sr.value[i]));
            ly1 = std::max(ly1, std::log10(sr.value[i]));
        }
    }
    if (!(lx0 < lx1)) {
        lx0 = 0.0;
        lx1 = 1.0;
    }
    if (!(ly0 < ly1)) {
        ly0 = std::isfinite(ly0) ? ly0 - 1.0 : 0.0;
        ly1 = ly0 + 2.0;
    }
    const double w = 640.0, h = 480.0, m = 60.0;
    auto px = [&](double lx) { return m + (lx - lx0) / (lx1 - lx0) * (w - 2 * m); };
    auto py = [&](double ly) { return h - m - (ly - ly0) / (ly1 - ly0) * (h - 2 * m); };

    std::ostringstream s;
    char buf[256];
    std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n", w, h);
    s << buf;
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n", m, m,
                  w - 2 * m, h - 2 * m);
    s << buf;
    for (int k = static_cast<int>(std::ceil(lx0)); k <= static_cast<int>(std::floor(lx1)); ++k) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">1e%d</text>\n",
                      px(k), h - m + 18.0, k);
        s << buf;
    }
    for (int k = static_cast<int>(std::ceil(ly0)); k <= static_cast<int>(std::floor(ly1)); ++k) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">1e%d</text>\n",
                      m - 6.0, py(k) + 4.0, k);
        s << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\">", w / 2,
                  h - 15.0);
    s << buf << x_label << "</text>\n";

    // Slope -1/2 guide anchored at the top left.
    const double gy1 = ly1 - 0.5 * (lx1 - lx0);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n",
                  px(lx0), py(ly1), px(lx1), py(gy1));
    s << buf;

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& sr = series[k];
        const char* color = colors[k % 4];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < sr.n.size(); ++i) {
            if (!(sr.n[i] > 0.0 && sr.value[i] > 0.0)) continue;
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(std::log10(sr.n[i])),
                          py(std::log10(sr.value[i])));
            s << buf;
            first = false;
        }
        s << "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">", w - m - 150.0,
                      m + 18.0 + 16.0 * static_cast<double>(k), color);
        s << buf << sr.label << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out << text;
    if (!out) throw ArgumentError("failed writing " + path.string());
}

}  // namespace plastafem
