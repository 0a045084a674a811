// Hand-written golden harness for toylib's parse_header. Slices the raw
// buffer into (buf, len) and provides the out-parameter locally.
#include <stddef.h>
#include <stdint.h>

#include "toylib.h"

extern "C" int LLVMFuzzerTestOneInput(const uint8_t *data, size_t size) {
  toy_header hdr;
  (void)parse_header(data, size, &hdr);
  return 0;
}
