#pragma once

#include <string>

namespace kinetic {

enum class BoundaryCondition { Specular, Diffuse };

/// "specular" or "diffuse"; throws ConfigError on anything else.
BoundaryCondition parse_boundary_condition(const std::string& tag);
const char* to_string(BoundaryCondition bc);

}  // namespace kinetic
