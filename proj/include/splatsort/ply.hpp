#pragma once

#include "splatsort/scene.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace splatsort {

/// Malformed or truncated PLY input. `offset` is the byte offset where parsing failed
/// and `field` the header token or vertex property being read ("" when not applicable).
class PlyError : public Error {
  public:
    PlyError(const std::string &what, std::size_t offset, std::string field);

    std::size_t offset() const noexcept { return mOffset; }
    const std::string &field() const noexcept { return mField; }

  private:
    std::size_t mOffset;
    std::string mField;
};

/// Parses a binary little-endian PLY in the trained-3DGS export layout
/// (x y z, f_dc_0..2, f_rest_*, opacity, scale_0..2, rot_0..3). Extra vertex
/// properties (normals etc.) are skipped. f_rest may hold 0, 9, 24 or 45
/// coefficients; the SH degree is inferred from the count.
Scene loadPly(std::span<const std::byte> bytes);
Scene loadPlyFile(const std::string &path);

/// Writes the same layout; f_rest carries as many coefficients as the highest
/// SH degree present in the scene needs.
std::string savePly(const Scene &scene);
void savePlyFile(const Scene &scene, const std::string &path);

} // namespace splatsort
