from src.spherical_hmc.exception import CustomException

from pathlib import Path

from box import ConfigBox

import sys, yaml, os, json

import toml
import pandas as pd


def create_dirs(path: str | Path) -> None:
    """creates directory if path do not exists

    Args:
        path (str): directory path for creation
    """
    try:
        os.makedirs(Path(path), exist_ok=True)
    except Exception as e:
        raise CustomException(e, sys)


def load_yaml(path: str | Path) -> ConfigBox:
    """reads the yaml file available in path

    Args:
        path (str): path of the yaml file

    Returns:
        ConfigBox: dict["key"] = value --------->  dict.key = value
    """
    try:
        with open(Path(path), "r") as yaml_file_obj:
            return ConfigBox(yaml.safe_load(yaml_file_obj) or {})
    except Exception as e:
        raise CustomException(e, sys)


def load_toml(path: str | Path) -> ConfigBox:
    """reads the toml file available in path

    Args:
        path (str): path of the toml file

    Returns:
        ConfigBox: parsed key-value tables
    """
    try:
        with open(Path(path), "r") as toml_file_obj:
            return ConfigBox(toml.load(toml_file_obj))
    except Exception as e:
        raise CustomException(e, sys)


def load_config_file(path: str | Path) -> ConfigBox:
    """reads a yaml or toml configuration, chosen by file suffix

    Args:
        path (str): path of the configuration file

    Returns:
        ConfigBox: parsed configuration
    """
    suffix = Path(path).suffix.lower()
    if suffix == ".toml":
        return load_toml(path)
    if suffix in (".yaml", ".yml"):
        return load_yaml(path)
    raise CustomException(f"unsupported configuration format '{suffix}' for {path}", sys)


def dump_yaml(content: dict, file_path: str | Path) -> None:
    """saves the yaml file with provided content

    Args:
        content (dict): content for the yaml file
        file_path (str): path to save the file
    """
    try:
        with open(Path(file_path), "w") as file:
            yaml.safe_dump(content, file, sort_keys=False)
    except Exception as e:
        raise CustomException(e, sys)


def dump_json(data: dict, path: str | Path) -> None:
    """saves the dictionary into json file

    Args:
        data (dict): dictionary data to save in form of json
        path (str): path to save the file
    """
    try:
        json_object = json.dumps(data, indent=4)

        with open(Path(path), "w") as outfile:
            outfile.write(json_object)
    except Exception as e:
        raise CustomException(e, sys)


def load_json(path: str | Path) -> dict:
    """reads the data present inside the file provided in 'path' variable

    Args:
        path (str): path of the json file

    Returns:
        json: json of data inside file
    """
    try:
        with open(Path(path), 'r') as openfile:
            return json.load(openfile)
    except Exception as e:
        raise CustomException(e, sys)


def dump_csv(frame: pd.DataFrame, path: str | Path, float_format: str | None = None) -> None:
    """saves a DataFrame as csv without the index

    Args:
        frame (pd.DataFrame): table to write
        path (str): path to save the file
        float_format (str): printf-style float format, full precision when given "%.17g"
    """
    try:
        frame.to_csv(Path(path), index=False, float_format=float_format)
    except Exception as e:
        raise CustomException(e, sys)
