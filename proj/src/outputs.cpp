#include "epduct/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace epduct {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp);
        out << content;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot rename " + tmp + " -> " + path + ": " + ec.message());
}

void write_json(const std::string& path, const nlohmann::json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_background_csv(const std::string& path, const BackgroundSolution& bg) {
    std::ostringstream os;
    os << "x1,u,E,rho,phi0,Phi0\n";
    for (int i = 0; i < bg.n(); ++i)
        os << format_double(bg.x1[i]) << ',' << format_double(bg.u[i]) << ','
           << format_double(bg.e[i]) << ',' << format_double(bg.rho[i]) << ','
           << format_double(bg.phi0[i]) << ',' << format_double(bg.cap_phi0[i]) << '\n';
    atomic_write(path, os.str());
}

void write_weight_csv(const std::string& path, const EnergyWeight& w) {
    std::ostringstream os;
    os << "x1,w,dw,margin_i,margin_ii,margin_iii\n";
    for (std::size_t i = 0; i < w.x1.size(); ++i)
        os << format_double(w.x1[i]) << ',' << format_double(w.w[i]) << ','
           << format_double(w.wp[i]) << ',' << format_double(w.m_i[i]) << ','
           << format_double(w.m_ii[i]) << ',' << format_double(w.m_iii[i]) << '\n';
    atomic_write(path, os.str());
}

void write_field_csv(const std::string& path, const Field3& f) {
    const auto& g = f.grid();
    std::ostringstream os;
    os << "x1,x2,x3,value\n";
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k)
                os << format_double(g.x1(i)) << ',' << format_double(g.x2(j)) << ','
                   << format_double(g.x3(k)) << ',' << format_double(f(i, j, k)) << '\n';
    atomic_write(path, os.str());
}

void write_field2_csv(const std::string& path, const Field2& f) {
    std::ostringstream os;
    os << "x2,x3,value\n";
    for (int j = 0; j < f.n2(); ++j)
        for (int k = 0; k < f.n3(); ++k)
            os << format_double(f.x2(j)) << ',' << format_double(f.x3(k)) << ','
               << format_double(f(j, k)) << '\n';
    atomic_write(path, os.str());
}

void write_modal_csv(const std::string& path, const ModalSolution& sol) {
    std::ostringstream os;
    os << "x1,mode,k,l,theta,Theta\n";
    const auto& modes = sol.basis->modes();
    for (int i = 0; i < sol.n1(); ++i)
        for (int m = 0; m < sol.basis->num_modes(); ++m)
            os << format_double(sol.x1[i]) << ',' << m << ',' << modes[m].first << ','
               << modes[m].second << ',' << format_double(sol.theta(m, i)) << ','
               << format_double(sol.cap_theta(m, i)) << '\n';
    atomic_write(path, os.str());
}

}  // namespace epduct
