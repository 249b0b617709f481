#pragma once

namespace smore {

/// Resolve a requested worker count: 0 means "whatever OpenMP offers",
/// any positive value is used as-is. Always 1 when built without OpenMP.
int resolve_threads(int requested);

/// True when the library was built with OpenMP support.
bool parallel_enabled();

}  // namespace smore
