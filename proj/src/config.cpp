#include "plastafem/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace plastafem {

ConfigError::ConfigError(std::vector<std::string> messages)
    : Error([&] {
          std::string all = "invalid configuration:";
          for (const auto& m : messages) all += "\n  " + m;
          return all;
      }()),
      messages_(std::move(messages)) {}

namespace {

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<double, bool, std::string, Array> data;
    std::size_t line = 0;
    std::size_t column = 0;
};

struct SyntaxError {
    std::size_t column;
    std::string message;
};

class ValueParser {
public:
    ValueParser(std::string_view text, std::size_t line, std::size_t offset)
        : text_(text), line_(line), offset_(offset) {}

    Value parse_top() {
        Value v = parse_value();
        skip_space();
        if (pos_ < text_.size() && text_[pos_] != '#') fail("unexpected text after value");
        return v;
    }

private:
    Value parse_value() {
        skip_space();
        if (pos_ >= text_.size()) fail("missing value");
        Value v;
        v.line = line_;
        v.column = offset_ + pos_ + 1;
        const char c = text_[pos_];
        if (c == '"') {
            ++pos_;
            std::string s;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
                s += text_[pos_++];
            }
            if (pos_ >= text_.size()) fail("unterminated string");
            ++pos_;
            v.data = std::move(s);
        } else if (c == '[') {
            ++pos_;
            Array items;
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == ']') {
                ++pos_;
            } else {
                for (;;) {
                    items.push_back(parse_value());
                    skip_space();
                    if (pos_ < text_.size() && text_[pos_] == ',') {
                        ++pos_;
                        continue;
                    }
                    if (pos_ < text_.size() && text_[pos_] == ']') {
                        ++pos_;
                        break;
                    }
                    fail("expected ',' or ']'");
                }
            }
            v.data = std::move(items);
        } else if (text_.substr(pos_, 4) == "true") {
            pos_ += 4;
            v.data = true;
        } else if (text_.substr(pos_, 5) == "false") {
            pos_ += 5;
            v.data = false;
        } else {
            const std::size_t start = pos_;
            if (text_[pos_] == '+' || text_[pos_] == '-') ++pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' || text_[pos_] == '_' ||
                    ((text_[pos_] == '+' || text_[pos_] == '-') && (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
                ++pos_;
            }
            std::string digits;
            for (std::size_t i = start; i < pos_; ++i) {
                if (text_[i] != '_') digits += text_[i];
            }
            if (!digits.empty() && digits[0] == '+') digits.erase(0, 1);
            double d = 0.0;
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
            if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(d)) {
                pos_ = start;
                fail("expected a number, string, boolean or array");
            }
            v.data = d;
        }
        return v;
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError{offset_ + pos_ + 1, msg}; }

    std::string_view text_;
    std::size_t line_;
    std::size_t offset_;
    std::size_t pos_ = 0;
};

std::string where(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    }
    return true;
}

class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void parse(std::string_view text) {
        std::size_t line_no = 0;
        std::string section;
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            std::string_view line = text.substr(start, end - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            ++line_no;
            parse_line(line, line_no, section);
            if (end == text.size()) break;
            start = end + 1;
        }
    }

    std::map<std::string, Value> values;

private:
    void parse_line(std::string_view line, std::size_t line_no, std::string& section) {
        std::size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i == line.size() || line[i] == '#') return;
        if (line[i] == '[') {
            const std::size_t close = line.find(']', i);
            if (close == std::string_view::npos) {
                errors_.push_back(where(line_no, line.size() + 1) + ": expected ']' to close the section header");
                return;
            }
            const std::string name = trim(line.substr(i + 1, close - i - 1));
            if (!valid_name(name)) {
                errors_.push_back(where(line_no, i + 2) + ": invalid section name");
                return;
            }
            const std::string rest = trim(line.substr(close + 1));
            if (!rest.empty() && rest[0] != '#') {
                errors_.push_back(where(line_no, close + 2) + ": unexpected text after section header");
            }
            section = name;
            return;
        }
        const std::size_t eq = line.find('=', i);
        if (eq == std::string_view::npos) {
            errors_.push_back(where(line_no, i + 1) + ": expected 'key = value'");
            return;
        }
        const std::string key = trim(line.substr(i, eq - i));
        if (!valid_name(key)) {
            errors_.push_back(where(line_no, i + 1) + ": invalid key name");
            return;
        }
        const std::string full = section.empty() ? key : section + "." + key;
        try {
            Value v = ValueParser(line.substr(eq + 1), line_no, eq + 1).parse_top();
            if (values.contains(full)) {
                errors_.push_back(where(line_no, i + 1) + ": duplicate key '" + full + "'");
                return;
            }
            values.emplace(full, std::move(v));
        } catch (const SyntaxError& e) {
            errors_.push_back(where(line_no, e.column) + ": " + e.message);
        }
    }

    std::vector<std::string>& errors_;
};

/// Pulls typed values out of the parsed table, recording every problem.
class Extractor {
public:
    Extractor(std::map<std::string, Value>& values, std::vector<std::string>& errors)
        : values_(values), errors_(errors) {}

    const Value* take(const std::string& key) {
        used_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }

    void number(const std::string& key, double& out, double lo, double hi, bool lo_open, const char* range) {
        const Value* v = take(key);
        if (!v) return;
        const double* d = std::get_if<double>(&v->data);
        if (!d) {
            error(*v, key + " must be a number");
            return;
        }
        if (*d < lo || *d > hi || (lo_open && *d == lo)) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", *d);
            error(*v, key + " = " + buf + " is out of range " + range);
            return;
        }
        out = *d;
    }

    template <class Int>
    void integer(const std::string& key, Int& out, double lo, double hi, const char* range) {
        double d = static_cast<double>(out);
        const Value* v = take(key);
        if (!v) return;
        used_.erase(key);
        number(key, d, lo, hi, false, range);
        if (d != std::floor(d)) {
            error(*v, key + " must be an integer");
            return;
        }
        out = static_cast<Int>(d);
    }

    void boolean(const std::string& key, bool& out) {
        const Value* v = take(key);
        if (!v) return;
        if (const bool* b = std::get_if<bool>(&v->data)) {
            out = *b;
        } else {
            error(*v, key + " must be true or false");
        }
    }

    const std::string* string(const std::string& key) {
        const Value* v = take(key);
        if (!v) return nullptr;
        if (const std::string* s = std::get_if<std::string>(&v->data)) return s;
        error(*v, key + " must be a string");
        return nullptr;
    }

    void vector_expression(const std::string& key, VectorExpression& out) {
        const Value* v = take(key);
        if (!v) return;
        const std::string* s = std::get_if<std::string>(&v->data);
        if (!s) {
            error(*v, key + " must be a string \"(e1, e2)\"");
            return;
        }
        try {
            out = VectorExpression::parse(*s);
        } catch (const ExpressionError& e) {
            error(*v, key + ": " + e.what() + " of the expression");
        }
    }

    void segments(const std::string& key, std::vector<Segment>& out) {
        const Value* v = take(key);
        if (!v) return;
        const Array* arr = std::get_if<Array>(&v->data);
        if (!arr) {
            error(*v, key + " must be an array of [x0, y0, x1, y1] segments");
            return;
        }
        for (const Value& item : *arr) {
            const Array* seg = std::get_if<Array>(&item.data);
            std::array<double, 4> c{};
            bool ok = seg && seg->size() == 4;
            for (std::size_t k = 0; ok && k < 4; ++k) {
                const double* d = std::get_if<double>(&(*seg)[k].data);
                ok = d != nullptr;
                if (ok) c[k] = *d;
            }
            if (!ok) {
                error(item, key + ": each segment must be [x0, y0, x1, y1]");
                continue;
            }
            if (c[0] != c[2] && c[1] != c[3]) {
                error(item, key + ": segment is not axis-aligned");
                continue;
            }
            out.push_back({{c[0], c[1]}, {c[2], c[3]}});
        }
    }

    void report_unknown() {
        for (const auto& [key, v] : values_) {
            if (!used_.contains(key)) error(v, "unknown key '" + key + "'");
        }
    }

    void error(const Value& v, const std::string& msg) { errors_.push_back(where(v.line, v.column) + ": " + msg); }

private:
    std::map<std::string, Value>& values_;
    std::vector<std::string>& errors_;
    std::set<std::string> used_;
};

}  // namespace

std::vector<Segment> default_dirichlet(const std::string& builtin) {
    if (builtin == "unit-square") return {{{0, 0}, {0, 1}}};
    if (builtin == "l-shape") return {{{0, 0}, {1, 0}}, {{0, 0}, {0, -1}}};
    return {};
}

ProblemConfig parse_config(std::string_view text) {
    std::vector<std::string> errors;
    Reader reader(errors);
    reader.parse(text);

    ProblemConfig cfg;
    Extractor ex(reader.values, errors);

    const std::string* builtin = ex.string("mesh.builtin");
    const std::string* file = ex.string("mesh.file");
    if (builtin) {
        if (*builtin != "unit-square" && *builtin != "l-shape") {
            ex.error(*ex.take("mesh.builtin"), "mesh.builtin must be \"unit-square\" or \"l-shape\"");
        }
        cfg.mesh_builtin = *builtin;
    }
    if (file) cfg.mesh_file = *file;
    if (builtin && file) {
        ex.error(*ex.take("mesh.file"), "mesh.builtin and mesh.file are mutually exclusive");
    } else if (!builtin && !file && !reader.values.contains("mesh.builtin") && !reader.values.contains("mesh.file")) {
        errors.push_back("missing key: mesh.builtin or mesh.file");
    }
    ex.integer("mesh.initial_refinements", cfg.initial_refinements, 0, 20, "[0, 20]");
    ex.segments("boundary.dirichlet", cfg.dirichlet);

    Material& m = cfg.material;
    ex.number("material.mu", m.mu, 0.0, HUGE_VAL, true, "(0, inf)");
    ex.number("material.lambda", m.lambda, 0.0, HUGE_VAL, false, "[0, inf)");
    ex.number("material.h_kin", m.h_kin, 0.0, HUGE_VAL, true, "(0, inf)");
    ex.number("material.h_iso", m.h_iso, 0.0, HUGE_VAL, true, "(0, inf)");
    ex.number("material.sigma_y", m.sigma_y, 0.0, HUGE_VAL, true, "(0, inf)");

    ex.vector_expression("loads.f", cfg.f);
    ex.vector_expression("loads.g", cfg.g);

    AdaptOptions& a = cfg.adapt;
    ex.number("adaptivity.theta", a.theta, 0.0, 1.0, true, "(0, 1]");
    ex.integer("adaptivity.max_levels", a.stop.max_levels, 0, 1000, "[0, 1000]");
    ex.integer("adaptivity.max_dofs", a.stop.max_dofs, 1, 1e9, "[1, 1e9]");
    ex.number("adaptivity.eta_tol", a.stop.eta_tol, 0.0, HUGE_VAL, false, "[0, inf)");

    ex.number("solver.tol", a.solver.tol, 0.0, 1.0, true, "(0, 1]");
    ex.integer("solver.max_iterations", a.solver.max_iterations, 1, 1e7, "[1, 1e7]");
    ex.number("solver.linear_tol", a.solver.linear_tol, 0.0, 1.0, true, "(0, 1]");
    if (const std::string* kind = ex.string("solver.linear_solver")) {
        if (*kind == "direct") {
            a.solver.linear_solver = LinearSolverKind::Direct;
        } else if (*kind == "cg") {
            a.solver.linear_solver = LinearSolverKind::ConjugateGradient;
        } else {
            ex.error(*ex.take("solver.linear_solver"), "solver.linear_solver must be \"direct\" or \"cg\"");
        }
    }

    ex.integer("diagnostics.reference_refinements", cfg.reference_refinements, 0, 6, "[0, 6]");
    ex.integer("diagnostics.seed", cfg.seed, 0, 9007199254740992.0, "[0, 2^53]");

    if (const std::string* dir = ex.string("output.dir")) cfg.output_dir = *dir;
    ex.boolean("output.wall_time", a.record_wall_time);
    ex.boolean("output.snapshots", cfg.snapshots);

    ex.report_unknown();
    if (!errors.empty()) throw ConfigError(std::move(errors));
    if (cfg.dirichlet.empty()) cfg.dirichlet = default_dirichlet(cfg.mesh_builtin);
    return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open " + path.string()});
    std::ostringstream ss;
    ss << in.rdbuf();
    ProblemConfig cfg = parse_config(ss.str());
    cfg.base_dir = path.parent_path();
    return cfg;
}

Problem build_problem(const ProblemConfig& config) {
    Mesh mesh = [&] {
        if (config.mesh_builtin == "unit-square") return unit_square_mesh(config.dirichlet);
        if (config.mesh_builtin == "l-shape") return l_shape_mesh(config.dirichlet);
        std::filesystem::path p = config.mesh_file;
        if (p.is_relative()) p = config.base_dir / p;
        std::ifstream in(p);
        if (!in) throw ConfigError({"cannot open mesh file " + p.string()});
        Mesh read = read_mesh(in);
        if (config.dirichlet.empty()) return read;
        std::vector<std::array<std::size_t, 3>> tris;
        for (const Element& el : read.elements()) tris.push_back(el.v);
        BoundaryTags tags = tag_boundary(read.vertices(), tris, config.dirichlet);
        return Mesh::from_parts(read.vertices(), read.elements(), std::move(tags));
    }();
    mesh = refine_uniform(mesh, config.initial_refinements);
    const VectorExpression f = config.f;
    const VectorExpression g = config.g;
    LoadData loads{[f](Vec2 x) { return f(x); }, [g](Vec2 x) { return g(x); }};
    config.material.validate();
    return {std::move(mesh), config.material, std::move(loads)};
}

}  // namespace plastafem
