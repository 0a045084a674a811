// Broken harness: never returns.
#include <stddef.h>
#include <stdint.h>

extern "C" int LLVMFuzzerTestOneInput(const uint8_t *data, size_t size) {
  volatile size_t n = size;
  while (true) {
    n = n * 2 + 1;
  }
  (void)data;
  return 0;
}
