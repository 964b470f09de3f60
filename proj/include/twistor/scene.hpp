#pragma once

// Scene configuration: a line-oriented key=value format with [section]
// headers, strict unknown-key rejection, canonical serialisation, and a
// small complex-expression grammar for custom incident waves.

#include <cctype>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "closed_forms.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "reflection.hpp"

namespace twistor {

// ---------------------------------------------------------------------------
// Expression grammar: + - * / ^int, unary -, conj(), sqrt(), abs(),
// literals (decimal, i), variables xi and nu (both bound to the parameter).
// ---------------------------------------------------------------------------

namespace expr {

using Fn = std::function<cplx(cplx)>;

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    Fn parse() {
        Fn e = expression();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError(1, "unexpected trailing input in expression at '" +
                                    text_.substr(pos_) + "'");
        return e;
    }

private:
    const std::string& text_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Fn expression() {
        Fn lhs = term();
        while (true) {
            if (eat('+')) {
                Fn rhs = term();
                lhs = [lhs, rhs](cplx v) { return lhs(v) + rhs(v); };
            } else if (eat('-')) {
                Fn rhs = term();
                lhs = [lhs, rhs](cplx v) { return lhs(v) - rhs(v); };
            } else {
                return lhs;
            }
        }
    }

    Fn term() {
        Fn lhs = factor();
        while (true) {
            if (eat('*')) {
                Fn rhs = factor();
                lhs = [lhs, rhs](cplx v) { return lhs(v) * rhs(v); };
            } else if (eat('/')) {
                Fn rhs = factor();
                lhs = [lhs, rhs](cplx v) { return lhs(v) / rhs(v); };
            } else {
                return lhs;
            }
        }
    }

    Fn factor() {
        Fn base = unary();
        if (eat('^')) {
            skip_ws();
            bool neg = eat('-');
            size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            if (start == pos_) throw ParseError(1, "expected integer exponent after '^'");
            int n = std::stoi(text_.substr(start, pos_ - start));
            return [base, n, neg](cplx v) {
                cplx b = base(v);
                cplx acc(1.0, 0.0);
                for (int k = 0; k < n; ++k) acc *= b;
                return neg ? 1.0 / acc : acc;
            };
        }
        return base;
    }

    Fn unary() {
        if (eat('-')) {
            Fn inner = unary();
            return [inner](cplx v) { return -inner(v); };
        }
        if (eat('+')) return unary();
        return primary();
    }

    Fn primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError(1, "unexpected end of expression");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            const double value = std::stod(text_.substr(pos_), &used);
            pos_ += used;
            return [value](cplx) { return cplx(value, 0.0); };
        }
        if (c == '(') {
            ++pos_;
            Fn inner = expression();
            if (!eat(')')) throw ParseError(1, "missing ')'");
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   std::isalnum(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "i") return [](cplx) { return cplx(0.0, 1.0); };
            if (name == "xi" || name == "nu") return [](cplx v) { return v; };
            if (name == "conj" || name == "sqrt" || name == "abs") {
                if (!eat('(')) throw ParseError(1, name + " expects '('");
                Fn inner = expression();
                if (!eat(')')) throw ParseError(1, "missing ')' after " + name);
                if (name == "conj")
                    return [inner](cplx v) { return std::conj(inner(v)); };
                if (name == "sqrt")
                    return [inner](cplx v) { return std::sqrt(inner(v)); };
                return [inner](cplx v) { return cplx(std::abs(inner(v)), 0.0); };
            }
            throw ParseError(1, "unknown identifier '" + name + "'");
        }
        throw ParseError(1, std::string("unexpected character '") + c + "'");
    }
};

inline Fn compile(const std::string& text) { return Parser(text).parse(); }

}  // namespace expr

// ---------------------------------------------------------------------------
// Scene configuration
// ---------------------------------------------------------------------------

struct SceneConfig {
    // [surface]
    std::string surface = "sphere";  // sphere | torus | plane
    Vec3 center{};
    double radius = 1.0;
    double a = 2.0, b = 1.0;
    double height = 0.0;
    double mask_radius = 1e-2;

    // [wave]
    std::string wave = "plane";  // plane | spherical | custom
    std::optional<cplx> xi1;     // plane: direction chart coordinate
    std::optional<Vec3> dir;     // plane: direction vector (covers the south pole)
    Vec3 source{};               // spherical
    bool antipodal = false;      // spherical: nu labels the antipodal direction
    std::string f1;              // custom: expression over xi / nu

    // [grid]
    double re_min = -2.0, re_max = 2.0, im_min = -2.0, im_max = 2.0;
    int nx = 128, ny = 128;

    // [offsets]
    std::vector<double> offsets{0.0};

    // [output]
    std::string path = "out";
    bool csv = true;
    bool obj = false;

    // [options]
    int branch = +1;

    bool operator==(const SceneConfig&) const = default;

    SurfaceGalleryEntry make_surface() const {
        GalleryParams p;
        p.center = center;
        p.radius = radius;
        p.a = a;
        p.b = b;
        p.height = height;
        p.mask_radius = mask_radius;
        return gallery(surface, p);
    }

    WaveSpec make_wave() const {
        if (wave == "plane") {
            if (dir) return PlaneWave{*dir};
            return PlaneWave{dir_to_vector(*xi1)};
        }
        if (wave == "spherical") return SphericalWave{source, antipodal};
        return GraphWave{expr::compile(f1)};
    }

    GridSpec make_grid() const {
        GridSpec g;
        g.u_min = re_min;
        g.u_max = re_max;
        g.v_min = im_min;
        g.v_max = im_max;
        g.nx = nx;
        g.ny = ny;
        return g;
    }
};

namespace detail_scene {

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::vector<double> parse_numbers(const std::string& text, int line) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ParseError(line, "empty value in list");
        size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ParseError(line, "not a number: '" + item + "'");
        }
        if (used != item.size()) throw ParseError(line, "not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ParseError(line, "empty list");
    return out;
}

inline double parse_number(const std::string& text, int line) {
    const auto v = parse_numbers(text, line);
    if (v.size() != 1) throw ParseError(line, "expected a single number");
    return v[0];
}

inline Vec3 parse_vec3(const std::string& text, int line) {
    const auto v = parse_numbers(text, line);
    if (v.size() != 3) throw ParseError(line, "expected x,y,z");
    return {v[0], v[1], v[2]};
}

inline cplx parse_cplx(const std::string& text, int line) {
    const auto v = parse_numbers(text, line);
    if (v.size() == 1) return cplx(v[0], 0.0);
    if (v.size() == 2) return cplx(v[0], v[1]);
    throw ParseError(line, "expected re or re,im");
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail_scene

inline void validate_scene(const SceneConfig& cfg) {
    using detail_scene::fmt;
    if (cfg.surface != "sphere" && cfg.surface != "torus" && cfg.surface != "plane")
        throw ValidationError("surface.type", "unknown surface '" + cfg.surface + "'");
    if (cfg.surface == "sphere" && !(cfg.radius > 0.0))
        throw ValidationError("surface.radius", "must be positive");
    if (cfg.surface == "torus" && !(cfg.a > cfg.b && cfg.b > 0.0))
        throw ValidationError("surface.a", "torus requires a > b > 0");
    if (cfg.mask_radius < 0.0)
        throw ValidationError("surface.mask_radius", "must be non-negative");
    if (cfg.wave != "plane" && cfg.wave != "spherical" && cfg.wave != "custom")
        throw ValidationError("wave.type", "unknown wave '" + cfg.wave + "'");
    if (cfg.wave == "plane") {
        if (!cfg.xi1 && !cfg.dir)
            throw ValidationError("wave.xi1", "plane wave needs xi1 or dir");
        if (cfg.dir && norm(*cfg.dir) < 1e-12)
            throw ValidationError("wave.dir", "zero direction");
    }
    if (cfg.wave == "custom") {
        if (cfg.f1.empty()) throw ValidationError("wave.F1", "custom wave needs F1");
        try {
            (void)expr::compile(cfg.f1)(cplx(0.3, 0.2));
        } catch (const ParseError& e) {
            throw ValidationError("wave.F1", e.message);
        }
    }
    if (!(cfg.re_min < cfg.re_max) || !(cfg.im_min < cfg.im_max))
        throw ValidationError("grid", "empty parameter box");
    if (cfg.nx < 2 || cfg.ny < 2) throw ValidationError("grid", "needs nx, ny >= 2");
    if (cfg.offsets.empty()) throw ValidationError("offsets.values", "empty");
    for (double c : cfg.offsets)
        if (!std::isfinite(c)) throw ValidationError("offsets.values", "not finite");
    if (cfg.branch != 1 && cfg.branch != -1)
        throw ValidationError("options.branch", "must be + or -");
    if (!cfg.csv && !cfg.obj) throw ValidationError("output.format", "no format selected");
}

// Parses the line-oriented scene format.  Unknown keys are errors in strict
// mode (the default); '#' and ';' start comments.
inline SceneConfig parse_scene(const std::string& text, bool strict = true) {
    using namespace detail_scene;
    SceneConfig cfg;
    std::stringstream ss(text);
    std::string raw;
    std::string section;
    int line_no = 0;

    while (std::getline(ss, raw)) {
        ++line_no;
        std::string line = raw;
        const size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "surface" && section != "wave" && section != "grid" &&
                section != "offsets" && section != "output" && section != "options") {
                if (strict) throw ParseError(line_no, "unknown section [" + section + "]");
                section.clear();
            }
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "empty key");
        if (value.empty()) throw ParseError(line_no, "empty value for '" + key + "'");
        if (section.empty()) {
            if (strict) throw ParseError(line_no, "key outside any section");
            continue;
        }

        const auto unknown = [&] {
            if (strict)
                throw ParseError(line_no, "unknown key '" + key + "' in [" + section + "]");
        };

        if (section == "surface") {
            if (key == "type") cfg.surface = value;
            else if (key == "center") cfg.center = parse_vec3(value, line_no);
            else if (key == "radius") cfg.radius = parse_number(value, line_no);
            else if (key == "a") cfg.a = parse_number(value, line_no);
            else if (key == "b") cfg.b = parse_number(value, line_no);
            else if (key == "height") cfg.height = parse_number(value, line_no);
            else if (key == "mask_radius") cfg.mask_radius = parse_number(value, line_no);
            else unknown();
        } else if (section == "wave") {
            if (key == "type") cfg.wave = value;
            else if (key == "xi1") cfg.xi1 = parse_cplx(value, line_no);
            else if (key == "dir") cfg.dir = parse_vec3(value, line_no);
            else if (key == "source") cfg.source = parse_vec3(value, line_no);
            else if (key == "chart") {
                if (value == "direct") cfg.antipodal = false;
                else if (value == "antipodal") cfg.antipodal = true;
                else throw ParseError(line_no, "chart must be direct or antipodal");
            }
            else if (key == "F1") cfg.f1 = value;
            else unknown();
        } else if (section == "grid") {
            if (key == "re_min") cfg.re_min = parse_number(value, line_no);
            else if (key == "re_max") cfg.re_max = parse_number(value, line_no);
            else if (key == "im_min") cfg.im_min = parse_number(value, line_no);
            else if (key == "im_max") cfg.im_max = parse_number(value, line_no);
            else if (key == "nx") cfg.nx = static_cast<int>(parse_number(value, line_no));
            else if (key == "ny") cfg.ny = static_cast<int>(parse_number(value, line_no));
            else unknown();
        } else if (section == "offsets") {
            if (key == "values") cfg.offsets = parse_numbers(value, line_no);
            else unknown();
        } else if (section == "output") {
            if (key == "path") cfg.path = value;
            else if (key == "format") {
                cfg.csv = cfg.obj = false;
                std::stringstream fs(value);
                std::string item;
                while (std::getline(fs, item, ',')) {
                    item = trim(item);
                    if (item == "csv") cfg.csv = true;
                    else if (item == "obj") cfg.obj = true;
                    else throw ParseError(line_no, "unknown format '" + item + "'");
                }
            } else unknown();
        } else if (section == "options") {
            if (key == "branch") {
                if (value == "+" || value == "+1") cfg.branch = 1;
                else if (value == "-" || value == "-1") cfg.branch = -1;
                else throw ParseError(line_no, "branch must be + or -");
            } else unknown();
        }
    }
    validate_scene(cfg);
    return cfg;
}

// Canonical text form; parse(serialize(cfg)) reproduces cfg exactly.
inline std::string serialize_scene(const SceneConfig& cfg) {
    using detail_scene::fmt;
    std::ostringstream os;
    os << "[surface]\n" << "type = " << cfg.surface << "\n";
    if (cfg.surface == "sphere") {
        os << "center = " << fmt(cfg.center.x) << "," << fmt(cfg.center.y) << ","
           << fmt(cfg.center.z) << "\n";
        os << "radius = " << fmt(cfg.radius) << "\n";
    } else if (cfg.surface == "torus") {
        os << "a = " << fmt(cfg.a) << "\n" << "b = " << fmt(cfg.b) << "\n";
        os << "mask_radius = " << fmt(cfg.mask_radius) << "\n";
    } else {
        os << "height = " << fmt(cfg.height) << "\n";
    }
    os << "\n[wave]\n" << "type = " << cfg.wave << "\n";
    if (cfg.wave == "plane") {
        if (cfg.dir)
            os << "dir = " << fmt(cfg.dir->x) << "," << fmt(cfg.dir->y) << ","
               << fmt(cfg.dir->z) << "\n";
        if (cfg.xi1)
            os << "xi1 = " << fmt(cfg.xi1->real()) << "," << fmt(cfg.xi1->imag()) << "\n";
    } else if (cfg.wave == "spherical") {
        os << "source = " << fmt(cfg.source.x) << "," << fmt(cfg.source.y) << ","
           << fmt(cfg.source.z) << "\n";
        os << "chart = " << (cfg.antipodal ? "antipodal" : "direct") << "\n";
    } else {
        os << "F1 = " << cfg.f1 << "\n";
    }
    os << "\n[grid]\n";
    os << "re_min = " << fmt(cfg.re_min) << "\n" << "re_max = " << fmt(cfg.re_max) << "\n";
    os << "im_min = " << fmt(cfg.im_min) << "\n" << "im_max = " << fmt(cfg.im_max) << "\n";
    os << "nx = " << cfg.nx << "\n" << "ny = " << cfg.ny << "\n";
    os << "\n[offsets]\nvalues = ";
    for (size_t k = 0; k < cfg.offsets.size(); ++k)
        os << (k ? "," : "") << fmt(cfg.offsets[k]);
    os << "\n\n[output]\npath = " << cfg.path << "\nformat = ";
    if (cfg.csv) os << "csv";
    if (cfg.csv && cfg.obj) os << ",";
    if (cfg.obj) os << "obj";
    os << "\n\n[options]\nbranch = " << (cfg.branch > 0 ? "+" : "-") << "\n";
    return os.str();
}

// FNV-1a of the canonical form; stamped into OBJ headers so outputs are
// traceable to their configuration.
inline std::string scene_hash(const SceneConfig& cfg) {
    const std::string text = serialize_scene(cfg);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace twistor
