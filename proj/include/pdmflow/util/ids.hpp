#pragma once

#include <string>

namespace pdmflow {

// UUID-format identifier (8-4-4-4-12 hex, version 4 bits set). Uniqueness comes
// from a process-wide random state plus an atomic counter; not a determinism
// surface.
std::string new_uuid();

} // namespace pdmflow
