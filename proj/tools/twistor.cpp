// Command-line frontend: reflect / wavefront / verify / gallery.
//
//   twistor reflect   --scene cfg.scene [--out dir] [--grid NxM] [--branch +]
//   twistor wavefront --scene cfg.scene [--out dir] [--offsets 0,1,2]
//   twistor verify    [--scene cfg.scene]
//   twistor gallery   [--name sphere]
//
// Scene files are the line-oriented key=value format described in the
// README.  TWISTOR_THREADS caps worker threads.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <twistor/twistor.hpp>

namespace fs = std::filesystem;
using namespace twistor;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read scene file: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct CommonArgs {
    std::string scene_path;
    std::string out_dir;
    std::string grid;
    std::string offsets;
    std::string branch;
    bool strict = true;
};

SceneConfig load_scene(const CommonArgs& args) {
    SceneConfig cfg = parse_scene(read_file(args.scene_path), args.strict);
    if (!args.grid.empty()) {
        const auto x = args.grid.find('x');
        if (x == std::string::npos) throw ValidationError("--grid", "expected NxM");
        cfg.nx = std::stoi(args.grid.substr(0, x));
        cfg.ny = std::stoi(args.grid.substr(x + 1));
    }
    if (!args.offsets.empty()) {
        cfg.offsets.clear();
        std::stringstream ss(args.offsets);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.offsets.push_back(std::stod(item));
    }
    if (!args.branch.empty()) {
        if (args.branch == "+") cfg.branch = 1;
        else if (args.branch == "-") cfg.branch = -1;
        else throw ValidationError("--branch", "must be + or -");
    }
    if (!args.out_dir.empty()) cfg.path = args.out_dir;
    validate_scene(cfg);
    return cfg;
}

struct ReflectOutput {
    ReflectedCongruence refl;
    std::vector<double> r;      // solved potential per node (NaN when absent)
    bool have_r = false;
    double path_discrepancy = 0.0;
};

ReflectOutput run_reflect_scene(const SceneConfig& cfg) {
    ReflectOutput out{
        reflect_congruence(
            ReflectionScene{cfg.make_wave(), cfg.make_surface().desc, {}},
            cfg.make_grid()),
        {}, false, 0.0};
    const GridSpec& grid = out.refl.grid;
    out.r.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());

    // Base the potential at the node deepest inside the reflected region
    // (multi-source BFS from the unusable nodes and the boundary).
    std::vector<int> depth(grid.size(), 0);
    std::deque<int> queue;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const int k = grid.index(i, j);
            const bool edge = i == 0 || j == 0 || i + 1 == grid.nx || j + 1 == grid.ny;
            if (out.refl.nodes[k].status != NodeStatus::Ok || edge) {
                depth[k] = 1;
                queue.push_back(k);
            }
        }
    int base = -1;
    while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        base = cur;
        const int i = cur % grid.nx, j = cur / grid.nx;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int t = 0; t < 4; ++t) {
            const int ni = i + di[t], nj = j + dj[t];
            if (ni < 0 || ni >= grid.nx || nj < 0 || nj >= grid.ny) continue;
            const int nk = grid.index(ni, nj);
            if (depth[nk] == 0) {
                depth[nk] = depth[cur] + 1;
                queue.push_back(nk);
            }
        }
    }
    if (base >= 0 && out.refl.nodes[base].status == NodeStatus::Ok) {
        try {
            const auto c = out.refl.congruence();
            const auto field =
                solve_potential(c, grid.node(base % grid.nx, base / grid.nx), 0.0);
            for (int n = 0; n < grid.size(); ++n)
                if (field.valid[n]) out.r[n] = field.r[n];
            out.have_r = true;
            out.path_discrepancy = field.path_discrepancy;
        } catch (const NotIntegrable&) {
        } catch (const PathMismatch&) {
        }
    }
    return out;
}

// branch = -1 exports the same congruence with the opposite orientation
// (antipodal directions, negated potential).
std::vector<ExportRecord> congruence_records(const ReflectOutput& out, double C,
                                             bool wavefront_points, int branch) {
    const GridSpec& grid = out.refl.grid;
    std::vector<ExportRecord> records;
    records.reserve(grid.size());
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const int k = grid.index(i, j);
            const auto& nd = out.refl.nodes[k];
            ExportRecord rec;
            rec.nu = grid.node(i, j);
            if (nd.status != NodeStatus::Ok) {
                rec.shadow = true;
                records.push_back(rec);
                continue;
            }
            OrientedLine line{nd.xi2, nd.eta2};
            double r = out.r[k];
            if (branch < 0) {
                try {
                    line = reverse_line(line);
                    r = -r;
                } catch (const ChartEscape&) {
                    rec.shadow = true;
                    records.push_back(rec);
                    continue;
                }
            }
            rec.xi = line.xi;
            rec.eta = line.eta;
            rec.C = C;
            if (!std::isnan(r)) rec.r = r;
            if (wavefront_points && rec.r)
                rec.point = point_from_line(line, *rec.r + C);
            else
                rec.point = nd.event.point;
            records.push_back(rec);
        }
    return records;
}

int cmd_reflect(const CommonArgs& args) {
    const SceneConfig cfg = load_scene(args);
    fs::create_directories(cfg.path);
    const auto out = run_reflect_scene(cfg);
    const std::string path = (fs::path(cfg.path) / "reflected.csv").string();
    write_congruence_csv(path, congruence_records(out, 0.0, false, cfg.branch));
    int ok = 0, shadow = 0, escape = 0;
    for (const auto& nd : out.refl.nodes) {
        if (nd.status == NodeStatus::Ok) ++ok;
        else if (nd.status == NodeStatus::Shadow) ++shadow;
        else ++escape;
    }
    std::cout << "reflected congruence -> " << path << "\n"
              << "  nodes: " << ok << " reflected, " << shadow << " shadow, " << escape
              << " chart-escape\n";
    if (out.have_r)
        std::cout << "  potential solved, path discrepancy " << out.path_discrepancy
                  << "\n";
    else
        std::cout << "  potential not solved (congruence not integrable on this grid)\n";
    return 0;
}

int cmd_wavefront(const CommonArgs& args) {
    const SceneConfig cfg = load_scene(args);
    fs::create_directories(cfg.path);
    const auto out = run_reflect_scene(cfg);
    if (!out.have_r)
        throw NotIntegrable("wavefront: reflected congruence is not integrable");
    const std::string hash = scene_hash(cfg);
    for (size_t ci = 0; ci < cfg.offsets.size(); ++ci) {
        const double C = cfg.offsets[ci];
        const auto records = congruence_records(out, C, true, cfg.branch);
        const std::string base = "wavefront_C" + std::to_string(ci);
        if (cfg.csv) {
            const std::string path = (fs::path(cfg.path) / (base + ".csv")).string();
            write_congruence_csv(path, records);
            std::cout << "wavefront C=" << C << " -> " << path << "\n";
        }
        if (cfg.obj) {
            std::vector<EuclidPoint> pts;
            for (const auto& rec : records)
                if (!rec.shadow && rec.point && rec.r) pts.push_back(*rec.point);
            const std::string path = (fs::path(cfg.path) / (base + ".obj")).string();
            write_obj(path, pts,
                      {"wavefront point cloud", "scene " + hash,
                       "offset C = " + std::to_string(C)});
            std::cout << "wavefront C=" << C << " -> " << path << "\n";
        }
    }
    return 0;
}

int report(const std::vector<CheckResult>& checks) {
    bool all_ok = true;
    for (const auto& c : checks) {
        std::cout << format_check(c) << "\n";
        all_ok = all_ok && c.passed;
    }
    std::cout << (all_ok ? "ALL CHECKS PASSED" : "CHECKS FAILED") << "\n";
    return all_ok ? 0 : 1;
}

// Scene-scoped verification: surface potential residual, a reflection pass
// with the Malus identity sampled on reflected nodes, and the potential
// path self-check.
std::vector<CheckResult> verify_scene(const SceneConfig& cfg) {
    std::vector<CheckResult> checks;
    const auto entry = cfg.make_surface();

    if (entry.F && entry.r) {
        // 65x65 so the chart pole xi = 0 is a node: with mask_radius = 0 a
        // singular torus node is evaluated and flagged instead of skipped.
        double worst = 0.0;
        bool finite = true;
        const auto S = entry.twistor_surface();
        const GridSpec grid = GridSpec::square(2.0, 65);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const cplx xi = grid.node(i, j);
                if (entry.graph_domain.masked(xi)) continue;
                double res;
                try {
                    res = potential_residual(S, xi);
                } catch (const ChartEscape&) {
                    finite = false;
                    continue;
                }
                if (!std::isfinite(res)) {
                    finite = false;
                    continue;
                }
                worst = std::max(worst, res);
            }
        checks.push_back({"surface_potential_residual", worst, 1e-6,
                          finite && worst <= 1e-6,
                          finite ? "" : "singular nodes evaluated (check mask_radius)"});
    }

    SceneConfig small = cfg;
    small.nx = std::min(cfg.nx, 33);
    small.ny = std::min(cfg.ny, 33);
    const auto out = run_reflect_scene(small);
    int ok_nodes = 0;
    for (const auto& nd : out.refl.nodes)
        if (nd.status == NodeStatus::Ok) ++ok_nodes;
    checks.push_back({"reflection_coverage", static_cast<double>(ok_nodes), 1.0,
                      ok_nodes >= 1,
                      std::to_string(ok_nodes) + " reflected nodes of " +
                          std::to_string(out.refl.grid.size())});

    double worst_malus = 0.0;
    int malus_samples = 0;
    const GridSpec& grid = out.refl.grid;
    for (int j = 1; j + 1 < grid.ny; j += 4)
        for (int i = 1; i + 1 < grid.nx; i += 4) {
            const auto& nd = out.refl.node(i, j);
            if (nd.status != NodeStatus::Ok) continue;
            bool interior = true;
            for (int dj = -1; dj <= 1 && interior; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (out.refl.node(i + di, j + dj).status != NodeStatus::Ok) {
                        interior = false;
                        break;
                    }
            if (!interior) continue;
            try {
                const auto m = incidence_param_map(out.refl.scene,
                                                   frames()[nd.event.frame],
                                                   nd.event.nu0);
                worst_malus = std::max(worst_malus, malus_residual(m, grid.node(i, j)));
                ++malus_samples;
            } catch (const std::exception&) {
            }
        }
    checks.push_back({"malus_identity", worst_malus, 1e-5,
                      malus_samples > 0 && worst_malus <= 1e-5,
                      std::to_string(malus_samples) + " interior samples"});

    checks.push_back({"potential_path_independence", out.path_discrepancy, 1e-4,
                      out.have_r && out.path_discrepancy <= 1e-4,
                      out.have_r ? "" : "potential not solved"});
    return checks;
}

int cmd_verify(const CommonArgs& args) {
    if (args.scene_path.empty()) return report(run_acceptance());
    return report(verify_scene(load_scene(args)));
}

int cmd_gallery(const std::string& name) {
    const std::vector<std::string> names =
        name.empty() ? std::vector<std::string>{"sphere", "torus", "plane"}
                     : std::vector<std::string>{name};
    for (const auto& n : names) {
        const auto entry = gallery(n);
        std::cout << entry.name;
        if (n == "sphere")
            std::cout << "  center=(" << entry.params.center << ") radius="
                      << entry.params.radius;
        if (n == "torus") std::cout << "  a=" << entry.params.a << " b=" << entry.params.b;
        if (n == "plane") std::cout << "  height=" << entry.params.height;
        if (entry.F && entry.r) {
            double worst = 0.0;
            const auto S = entry.twistor_surface();
            const GridSpec grid = GridSpec::square(2.0, 32);
            for (int j = 0; j < grid.ny; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    const cplx xi = grid.node(i, j);
                    if (entry.graph_domain.masked(xi)) continue;
                    if (n == "torus" && std::abs(xi) < 0.1) continue;
                    worst = std::max(worst, potential_residual(S, xi));
                }
            std::cout << "  potential residual " << worst;
        } else {
            std::cout << "  (normal congruence parameterised by surface point)";
        }
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometric optics on the space of oriented lines"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string gallery_name;

    const auto add_common = [&](CLI::App* cmd, bool need_scene) {
        auto* opt = cmd->add_option("--scene", args.scene_path, "scene file");
        if (need_scene) opt->required();
        cmd->add_option("--out", args.out_dir, "output directory");
        cmd->add_option("--grid", args.grid, "grid override, NxM");
        cmd->add_option("--offsets", args.offsets, "offset list a,b,c");
        cmd->add_option("--branch", args.branch, "branch choice + or -");
        cmd->add_flag("--strict,!--no-strict", args.strict,
                      "reject unknown scene keys (default on)");
    };

    auto* reflect = app.add_subcommand("reflect", "reflect a wave off a surface");
    add_common(reflect, true);
    auto* wavefront =
        app.add_subcommand("wavefront", "export reflected wavefront point clouds");
    add_common(wavefront, true);
    auto* verify = app.add_subcommand("verify", "run verification checks");
    add_common(verify, false);
    auto* gal = app.add_subcommand("gallery", "list built-in surfaces");
    gal->add_option("--name", gallery_name, "surface name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (reflect->parsed()) return cmd_reflect(args);
        if (wavefront->parsed()) return cmd_wavefront(args);
        if (verify->parsed()) return cmd_verify(args);
        if (gal->parsed()) return cmd_gallery(gallery_name);
    } catch (const ParseError& e) {
        std::cerr << "scene parse error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
