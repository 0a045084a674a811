// Generated fuzz driver for 'toy_decode_packet' (template synthesis).
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>
#include <string.h>

extern "C" int toy_decode_packet(const uint8_t *data, size_t size);

extern "C" int LLVMFuzzerTestOneInput(const uint8_t *data, size_t size) {
  (void)toy_decode_packet((const uint8_t *)data, (size_t)size);
  return 0;
}
