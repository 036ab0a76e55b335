import os
import os.path as osp
import shearwave.dispersion as dispersion


def _get_profiles_path() -> str:
    profiles_folder = "sample_profiles"

    # first try where package is installed
    # this will work for local call of unittests
    path = osp.abspath(
        osp.join(osp.dirname(dispersion.__file__), "..", "..", "..", profiles_folder)
    )
    if osp.exists(path):
        return path

    # otherwise check current directory (this will work for tox)
    path = osp.abspath(osp.join(os.getcwd(), profiles_folder))
    if osp.exists(path):
        return path

    raise FileNotFoundError(f"`{profiles_folder}` cannot be located")
