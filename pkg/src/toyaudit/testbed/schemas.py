from datetime import date

from pydantic import BaseModel, Field


class AccountCreate(BaseModel):
    name: str
    gender: str
    birthday: date
    weight_kg: float = Field(gt=0)
    height_cm: float = Field(gt=0)
    age_years: int = Field(gt=0)


class AccountCreated(BaseModel):
    user_id: str
    auth_token: str
    goal_ml: int


class DrinkEvent(BaseModel):
    ml: int = Field(gt=0)


class DrinkRecorded(BaseModel):
    recorded: bool
    total_ml: int


class PhotoToken(BaseModel):
    token: str


class RefreshRequest(BaseModel):
    auth_token: str


class RefreshResponse(BaseModel):
    auth_token: str
    expires_in: float


class Health(BaseModel):
    status: str = "ok"
