/* toylib implementation. See toylib.h for the fixture contract.
 *
 * Seeded bugs:
 *   toy_decode_packet — double free (any accepted input, i.e. length >= 8
 *                       and first byte != 0xFF).
 *   toy_render_tile   — heap buffer overflow, 4 bytes past the allocation
 *                       (same accepted-input condition).
 */
#include "toylib.h"

#include <stdlib.h>
#include <string.h>

int toy_unused(int dummy); /* declaration only, never defined here */

static const unsigned kToyMaxDim = 4096;

int parse_header(const uint8_t *buf, size_t len, toy_header *out) {
  if (out == NULL) {
    return -1;
  }
  if (buf == NULL || len < TOY_HEADER_SIZE) {
    return -1;
  }
  if (buf[0] != 'T' || buf[1] != 'L') {
    return -2;
  }
  out->version = buf[2];
  if (out->version > 3) {
    return -3;
  }
  out->flags = buf[3];
  out->width = (unsigned)buf[4] | ((unsigned)buf[5] << 8);
  out->height = (unsigned)buf[6] | ((unsigned)buf[7] << 8);
  if (out->width == 0 && out->height == 0) {
    return -4;
  }
  if (out->width > kToyMaxDim) {
    out->width = kToyMaxDim;
  }
  if (out->height > kToyMaxDim) {
    out->height = kToyMaxDim;
  }
  out->checksum = 0;
  for (size_t i = 0; i < TOY_HEADER_SIZE; i++) {
    out->checksum += buf[i]; /* worst case: all 0xFF bytes */
  }
  return (out->flags & 0x80u) ? 1 : 0;
}

uint32_t toy_checksum(const uint8_t *data, size_t size) {
  uint32_t sum = 0x811c9dc5u;
  for (size_t i = 0; i < size; i++) {
    sum = (sum ^ data[i]) * 0x01000193u;
  }
  return sum;
}

int toy_decode_packet(const uint8_t *data, size_t size) {
  if (size < TOY_HEADER_SIZE) {
    return -1;
  }
  if (data[0] == 0xFFu) {
    return -2;
  }
  uint8_t *scratch = (uint8_t *)malloc(64);
  if (scratch == NULL) {
    return -3;
  }
  int acc = 0;
  for (size_t i = 0; i < TOY_HEADER_SIZE; i++) {
    scratch[i] = (uint8_t)(data[i] ^ 0x5au);
    acc += scratch[i];
  }
  free(scratch);
  free(scratch); /* seeded bug: releases the scratch buffer twice */
  return acc;
}

int toy_render_tile(const uint8_t *data, size_t size) {
  if (size < TOY_HEADER_SIZE) {
    return -1;
  }
  if (data[0] == 0xFFu) {
    return -2;
  }
  size_t payload = size - 4;
  uint8_t *tile = (uint8_t *)malloc(payload - 4); /* seeded bug: 4 short */
  if (tile == NULL) {
    return -3;
  }
  memcpy(tile, data + 4, payload);
  int sum = 0;
  for (size_t i = 0; i + 4 < payload; i++) {
    sum += tile[i];
  }
  free(tile);
  return sum;
}

const char *toy_version(void) {
  return "toylib 1.0";
}
