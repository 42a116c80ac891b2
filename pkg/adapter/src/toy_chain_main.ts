/** Entry point: serve the toy chain model over stdio. */

import { serve } from "./protocol";
import { TOY_CAPABILITIES, toyChainModel } from "./toy_chain";

serve(toyChainModel, TOY_CAPABILITIES);
