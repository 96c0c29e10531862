#pragma once

#include <vector>

namespace gds {

// A frame interval in which one blob hosts components of two or more objects.
struct InteractionEvent {
  int start_frame = 0;
  int end_frame = 0;
  std::vector<int> object_ids;  // sorted, size >= 2
  std::vector<int> blob_trace;  // blob id per frame, start..end

  int blob_hint() const { return blob_trace.empty() ? -1 : blob_trace.front(); }
  int length() const { return end_frame - start_frame + 1; }
};

}  // namespace gds
