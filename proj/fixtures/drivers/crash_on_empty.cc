// Broken harness: dereferences null before looking at the input.
#include <stddef.h>
#include <stdint.h>

extern "C" int LLVMFuzzerTestOneInput(const uint8_t *data, size_t size) {
  volatile int *p = nullptr;
  *p = (int)size;
  (void)data;
  return 0;
}
