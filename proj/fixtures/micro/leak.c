/* Micro-program: allocates and never frees. */
#include <stdlib.h>

char *sink;

int main(void) {
  sink = (char *)malloc(64);
  sink[0] = 'x';
  sink = 0;
  return 0;
}
