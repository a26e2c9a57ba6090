/* The public header must compile as plain C. */
#include <polyg2p/polyg2p.h>

int polyg2p_header_is_c(void) {
  polyg2p_prompt_options options;
  polyg2p_prompt_options_default(&options);
  return options.style == POLYG2P_STYLE_CHOICE;
}
