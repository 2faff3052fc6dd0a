#pragma once

#include <stdexcept>
#include <string>

namespace divfem {

// Invalid or unsupported mesh / space configuration (CLI exit code 2).
class MeshError : public std::runtime_error {
public:
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

// Linear or eigenvalue solve failure (CLI exit code 3).
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace divfem
