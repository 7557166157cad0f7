#ifndef PIPECUT_TRACE_IO_HPP
#define PIPECUT_TRACE_IO_HPP

#include <string>

#include "pipecut/engine.hpp"
#include "pipecut/io.hpp"

namespace pipecut {

// Stored-run directory layout: one columnar CSV per parameter block per
// chain (chain<c>_<block>.csv) plus a manifest.txt with the resolved
// configuration, seeds, and content hashes of the inputs.  The manifest is
// written last, so its presence marks a complete directory.
void write_samples(const std::string& dir, const PosteriorSamples& samples,
                   const KeyValueMap& extra_manifest = {});

struct LoadedSamples {
  PosteriorSamples samples;
  KeyValueMap manifest;
};

LoadedSamples read_samples(const std::string& dir);

}  // namespace pipecut

#endif  // PIPECUT_TRACE_IO_HPP
