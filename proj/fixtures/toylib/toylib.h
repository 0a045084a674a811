/* toylib: a deliberately buggy miniature C library used as a pipeline
 * fixture. Two functions contain seeded memory-safety bugs, three are
 * benign. Inputs shorter than 8 bytes and inputs whose first byte is the
 * reserved tag 0xFF are rejected by every entry point, so the trivial
 * smoke seeds never reach the buggy paths. */
#ifndef TOYLIB_H
#define TOYLIB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define TOY_HEADER_SIZE 8

typedef struct toy_header {
  unsigned version;
  unsigned flags;
  unsigned width;
  unsigned height;
  unsigned checksum;
} toy_header;

int parse_header(const uint8_t *buf, size_t len, toy_header *out);
uint32_t toy_checksum(const uint8_t *data, size_t size);
int toy_decode_packet(const uint8_t *data, size_t size);
int toy_render_tile(const uint8_t *data, size_t size);
const char *toy_version(void);

#ifdef __cplusplus
}
#endif

#endif /* TOYLIB_H */
