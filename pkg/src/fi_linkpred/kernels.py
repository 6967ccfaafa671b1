"""Select the training-kernel backend.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy fallback. Set ``FI_LINKPRED_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("FI_LINKPRED_PURE", "") not in ("", "0"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

grow_forest = _impl.grow_forest
predict_forest = _impl.predict_forest
svm_fit = _impl.svm_fit
nn_loss_grad = _impl.nn_loss_grad
nn_fit = _impl.nn_fit

__all__ = ["BACKEND", "grow_forest", "predict_forest", "svm_fit", "nn_loss_grad", "nn_fit"]
