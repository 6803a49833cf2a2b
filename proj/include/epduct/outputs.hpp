#pragma once

#include <string>

#include "json.hpp"

#include "epduct/background.hpp"
#include "epduct/energy.hpp"
#include "epduct/grid.hpp"
#include "epduct/linear_solver.hpp"

namespace epduct {

void ensure_dir(const std::string& dir);

/// Write-to-temp then rename; partial files never appear under the final name.
void atomic_write(const std::string& path, const std::string& content);

void write_json(const std::string& path, const nlohmann::json& j);

/// Profile table x1,u,E,rho,phi0,Phi0.
void write_background_csv(const std::string& path, const BackgroundSolution& bg);

/// Weight samples x1,w,dw,margin_i,margin_ii,margin_iii.
void write_weight_csv(const std::string& path, const EnergyWeight& w);

/// Field dump x1,x2,x3,value with x3 fastest.
void write_field_csv(const std::string& path, const Field3& f);

/// Cross-section datum x2,x3,value.
void write_field2_csv(const std::string& path, const Field2& f);

/// Modal coefficients x1,mode,k,l,theta,Theta.
void write_modal_csv(const std::string& path, const ModalSolution& sol);

std::string format_double(double v);

}  // namespace epduct
