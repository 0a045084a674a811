/* Micro-program: frees the same allocation twice. */
#include <stdlib.h>

int main(void) {
  char *p = (char *)malloc(32);
  p[0] = 'x';
  free(p);
  free(p);
  return 0;
}
