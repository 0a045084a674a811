/* Micro-program: reads through a pointer after releasing it. */
#include <stdlib.h>

int main(void) {
  volatile char *p = (volatile char *)malloc(32);
  p[0] = 'x';
  free((void *)p);
  return (int)p[0];
}
