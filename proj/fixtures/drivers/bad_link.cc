// Broken harness: references a symbol that no library provides.
#include <stddef.h>
#include <stdint.h>

extern "C" int no_such_fn(const uint8_t *data, size_t size);

extern "C" int LLVMFuzzerTestOneInput(const uint8_t *data, size_t size) {
  return no_such_fn(data, size);
}
