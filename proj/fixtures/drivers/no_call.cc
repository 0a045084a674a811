// Broken harness: compiles and runs cleanly but never calls the target.
#include <stddef.h>
#include <stdint.h>

extern "C" int LLVMFuzzerTestOneInput(const uint8_t *data, size_t size) {
  unsigned acc = 0;
  for (size_t i = 0; i < size; i++) acc += data[i];
  return (int)(acc & 0);
}
