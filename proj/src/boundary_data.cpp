#include "epduct/boundary_data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace epduct {

namespace {
Field2 shifted(const Field2& f, double ref) {
    Field2 out = f;
    for (auto& x : out.data()) x -= ref;
    return out;
}

// Phi0 at the exit plane; the background must carry a sample there.
double phi0_exit_of(const BackgroundSolution& bg, double L) {
    for (int i = bg.n() - 1; i >= 0; --i)
        if (std::abs(bg.x1[i] - L) < 1e-9 * std::max(1.0, L)) return bg.cap_phi0[i];
    throw ConfigError("boundary data: background has no sample at the duct exit plane");
}
}  // namespace

Field2 BoundaryData::g1() const { return shifted(u_en, u0_ref); }
Field2 BoundaryData::g2() const { return shifted(e_en, e0_ref); }
Field2 BoundaryData::psi_ex() const { return shifted(phi_ex, phi0_exit); }

SigmaReport sigma(const BoundaryData& data) {
    SigmaReport out;
    Field3 db = data.b;
    for (auto& x : db.data()) x -= data.b0;
    out.b_c2 = ck_norm(db, 2);
    out.u_en_c3 = ck_norm(data.g1(), 3);
    out.e_en_c4 = ck_norm(data.g2(), 4);
    out.phi_ex_c4 = ck_norm(data.psi_ex(), 4);
    out.sigma = out.b_c2 + out.u_en_c3 + out.e_en_c4 + out.phi_ex_c4;
    return out;
}

CompatReport validate_compatibility(const BoundaryData& data, double tol) {
    const double h = std::min(data.grid.h2(), data.grid.h3());
    CompatReport rep;
    rep.tol = tol >= 0.0 ? tol : 10.0 * h * h;
    rep.items.push_back({"d_n b on Gamma_w", wall_normal_residual(data.b)});
    rep.items.push_back({"d_n u_en on edge(Gamma_0)", boundary_normal_residual(data.u_en, 1)});
    rep.items.push_back({"d_n E_en on edge(Gamma_0)", boundary_normal_residual(data.e_en, 1)});
    rep.items.push_back({"d_n^3 E_en on edge(Gamma_0)", boundary_normal_residual(data.e_en, 3)});
    rep.items.push_back({"d_n Phi_ex on edge(Gamma_L)", boundary_normal_residual(data.phi_ex, 1)});
    rep.items.push_back({"d_n^3 Phi_ex on edge(Gamma_L)", boundary_normal_residual(data.phi_ex, 3)});
    for (const auto& it : rep.items) rep.worst = std::max(rep.worst, it.residual);
    rep.pass = rep.worst <= rep.tol;
    return rep;
}

BoundaryData generate_synthetic(const std::vector<SyntheticMode>& modes,
                                const BackgroundSolution& bg, const DuctGrid& grid) {
    if (bg.length() < grid.length - 1e-12)
        throw ConfigError("generate_synthetic: background shorter than the duct");

    BoundaryData data;
    data.grid = grid;
    data.b0 = bg.b0;
    data.u0_ref = bg.u.front();
    data.e0_ref = bg.e.front();
    data.phi0_exit = phi0_exit_of(bg, grid.length);

    data.b = Field3(grid, bg.b0);
    data.u_en = Field2(grid.n2, grid.n3, data.u0_ref);
    data.e_en = Field2(grid.n2, grid.n3, data.e0_ref);
    data.phi_ex = Field2(grid.n2, grid.n3, data.phi0_exit);

    const double half_pi = std::numbers::pi / 2.0;
    for (const auto& m : modes) {
        if (m.sine)
            throw ConfigError("generate_synthetic: sine modes violate the wall compatibility "
                              "conditions and are rejected");
        if (m.k < 0 || m.l < 0) throw ConfigError("generate_synthetic: mode indices must be >= 0");
        auto mode2d = [&](double x2, double x3) {
            return std::cos(m.k * half_pi * (x2 + 1.0)) * std::cos(m.l * half_pi * (x3 + 1.0));
        };
        switch (m.target) {
            case SyntheticMode::Target::B:
                for (int i = 0; i < grid.n1; ++i) {
                    const double ax = std::cos(m.j1 * std::numbers::pi * grid.x1(i) / grid.length);
                    for (int j = 0; j < grid.n2; ++j)
                        for (int k = 0; k < grid.n3; ++k)
                            data.b(i, j, k) += m.amplitude * ax * mode2d(grid.x2(j), grid.x3(k));
                }
                break;
            case SyntheticMode::Target::UEn:
                for (int j = 0; j < grid.n2; ++j)
                    for (int k = 0; k < grid.n3; ++k)
                        data.u_en(j, k) += m.amplitude * mode2d(data.u_en.x2(j), data.u_en.x3(k));
                break;
            case SyntheticMode::Target::EEn:
                for (int j = 0; j < grid.n2; ++j)
                    for (int k = 0; k < grid.n3; ++k)
                        data.e_en(j, k) += m.amplitude * mode2d(data.e_en.x2(j), data.e_en.x3(k));
                break;
            case SyntheticMode::Target::PhiEx:
                for (int j = 0; j < grid.n2; ++j)
                    for (int k = 0; k < grid.n3; ++k)
                        data.phi_ex(j, k) += m.amplitude * mode2d(data.phi_ex.x2(j), data.phi_ex.x3(k));
                break;
        }
    }
    return data;
}

namespace {

Field2 load_field2_csv(const std::string& path, int n2, int n3) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open boundary CSV: " + path);
    std::string line;
    std::getline(in, line);  // header
    Field2 out(n2, n3);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        double c[3];
        for (int t = 0; t < 3; ++t) {
            if (!std::getline(ls, tok, t < 2 ? ',' : '\n'))
                throw ConfigError("malformed row in " + path);
            c[t] = std::stod(tok);
        }
        const int j = int(std::lround((c[0] + 1.0) / out.h2()));
        const int k = int(std::lround((c[1] + 1.0) / out.h3()));
        if (j < 0 || j >= n2 || k < 0 || k >= n3 || std::abs(out.x2(j) - c[0]) > 1e-9 ||
            std::abs(out.x3(k) - c[1]) > 1e-9)
            throw ConfigError("off-grid coordinates in " + path);
        out(j, k) = c[2];
        ++rows;
    }
    if (rows != std::size_t(n2) * n3) throw ConfigError("row count mismatch in " + path);
    return out;
}

Field3 load_field3_csv(const std::string& path, const DuctGrid& g) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open boundary CSV: " + path);
    std::string line;
    std::getline(in, line);  // header
    Field3 out(g);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        double c[4];
        for (int t = 0; t < 4; ++t) {
            if (!std::getline(ls, tok, t < 3 ? ',' : '\n'))
                throw ConfigError("malformed row in " + path);
            c[t] = std::stod(tok);
        }
        const int i = int(std::lround(c[0] / g.h1()));
        const int j = int(std::lround((c[1] + 1.0) / g.h2()));
        const int k = int(std::lround((c[2] + 1.0) / g.h3()));
        if (i < 0 || i >= g.n1 || j < 0 || j >= g.n2 || k < 0 || k >= g.n3 ||
            std::abs(g.x1(i) - c[0]) > 1e-9 || std::abs(g.x2(j) - c[1]) > 1e-9 ||
            std::abs(g.x3(k) - c[2]) > 1e-9)
            throw ConfigError("off-grid coordinates in " + path);
        out(i, j, k) = c[3];
        ++rows;
    }
    if (rows != g.size()) throw ConfigError("row count mismatch in " + path);
    return out;
}

}  // namespace

BoundaryData load_boundary_data(const std::string& manifest_path,
                                const BackgroundSolution& bg, const DuctGrid& grid) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open data manifest: " + manifest_path);
    nlohmann::json j;
    in >> j;
    for (const char* key : {"b", "u_en", "e_en", "phi_ex"})
        if (!j.contains(key))
            throw ConfigError(std::string("data manifest missing entry: ") + key);

    auto rel = [&](const std::string& p) {
        if (!p.empty() && p.front() == '/') return p;
        const auto slash = manifest_path.find_last_of('/');
        return slash == std::string::npos ? p : manifest_path.substr(0, slash + 1) + p;
    };

    BoundaryData data;
    data.grid = grid;
    data.b0 = bg.b0;
    data.u0_ref = bg.u.front();
    data.e0_ref = bg.e.front();
    data.phi0_exit = phi0_exit_of(bg, grid.length);
    data.b = load_field3_csv(rel(j["b"].get<std::string>()), grid);
    data.u_en = load_field2_csv(rel(j["u_en"].get<std::string>()), grid.n2, grid.n3);
    data.e_en = load_field2_csv(rel(j["e_en"].get<std::string>()), grid.n2, grid.n3);
    data.phi_ex = load_field2_csv(rel(j["phi_ex"].get<std::string>()), grid.n2, grid.n3);
    return data;
}

PsiShift homogenize_psi(const BoundaryData& data) {
    PsiShift out;
    out.g2 = data.g2();
    out.psi_ex = data.psi_ex();
    out.s = Field3(data.grid);
    const auto& g = data.grid;
    for (int i = 0; i < g.n1; ++i) {
        const double x1mL = g.x1(i) - g.length;
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k)
                out.s(i, j, k) = x1mL * out.g2(j, k) + out.psi_ex(j, k);
    }
    return out;
}

}  // namespace epduct
