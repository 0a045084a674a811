/* Micro-program: writes past the end of a stack buffer. */
volatile int idx = 16;

int main(void) {
  volatile char buf[16];
  buf[idx] = 'x';
  return (int)buf[0];
}
