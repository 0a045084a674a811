/* Micro-program: writes one byte past a heap allocation. */
#include <stdlib.h>

int main(void) {
  char *p = (char *)malloc(8);
  p[8] = 'x';
  free(p);
  return 0;
}
