#pragma once

// Field container format (see docs/field_format.md).

#include "qmalab/geometry.hpp"

#include <filesystem>
#include <iosfwd>

namespace qmalab::geometry {

void write_field(std::ostream& out, const ScalarField& field);
void write_field(std::ostream& out, const HermitianField& field);
void write_field(const std::filesystem::path& path, const ScalarField& field);

// Reconstructs the grid from the header.
ScalarField read_scalar_field(std::istream& in);
ScalarField read_scalar_field(const std::filesystem::path& path);
HermitianField read_hermitian_field(std::istream& in);

}  // namespace qmalab::geometry
