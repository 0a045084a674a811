/* Micro-program: stores through a null pointer. */
volatile int *p250;

int main(void) {
  *p250 = 42;
  return 0;
}
